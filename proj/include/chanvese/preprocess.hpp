#pragma once

// Noise injection and denoising filters.
//
// Deviates are derived from std::mt19937_64 directly, without the <random>
// distributions, so a seed gives the same output on every toolchain.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "chanvese/image.hpp"

namespace chanvese {

/// Seeded source of uniform and normal deviates.
class NoiseRng {
 public:
  explicit NoiseRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, bound) by rejection, without modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  /// Standard normal deviate (Box-Muller, both outputs used).
  double normal() {
    if (spare_) {
      const double z = *spare_;
      spare_.reset();
      return z;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

struct NoiseSpec {
  enum class Kind { Gaussian, SaltPepper };
  Kind kind = Kind::Gaussian;
  double mean = 0.0;
  double sigma = 0.1;
  double amount = 0.05;
  double salt_ratio = 0.5;
  std::uint64_t seed = 42;

  void validate() const {
    if (!(sigma >= 0.0)) throw std::invalid_argument("sigma: must be >= 0");
    if (!std::isfinite(mean)) throw std::invalid_argument("mean: must be finite");
    if (!(amount >= 0.0 && amount <= 1.0)) throw std::invalid_argument("amount: must be in [0, 1]");
    if (!(salt_ratio >= 0.0 && salt_ratio <= 1.0)) throw std::invalid_argument("salt_ratio: must be in [0, 1]");
  }
};

struct FilterSpec {
  enum class Kind { Gaussian, Median };
  Kind kind = Kind::Gaussian;
  double sigma = 1.0;
  int kernel_size = 5;
  int window = 3;

  void validate() const {
    if (kind == Kind::Gaussian) {
      if (!(sigma > 0.0)) throw std::invalid_argument("filter_sigma: must be > 0");
      if (kernel_size < 1 || kernel_size % 2 == 0) {
        throw std::invalid_argument("kernel_size: must be odd and >= 1");
      }
    } else if (window < 1 || window % 2 == 0) {
      throw std::invalid_argument("window: must be odd and >= 1");
    }
  }
};

/// Adds N(mean, sigma^2) to every pixel, then clamps to [0, 1].
inline GrayImage add_gaussian_noise(const GrayImage& img, double mean, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("add_gaussian_noise: sigma must be >= 0");
  NoiseRng rng(seed);
  Grid<double> out = img.grid();
  for (double& v : out) v += mean + sigma * rng.normal();
  return GrayImage(std::move(out));
}

/// Sets floor(amount * N) distinct random pixels to 1 (the first
/// floor(salt_ratio * k) of them) or 0 (the rest).
inline GrayImage add_salt_pepper(const GrayImage& img, double amount, double salt_ratio, std::uint64_t seed) {
  if (!(amount >= 0.0 && amount <= 1.0)) throw std::invalid_argument("add_salt_pepper: amount must be in [0, 1]");
  if (!(salt_ratio >= 0.0 && salt_ratio <= 1.0)) {
    throw std::invalid_argument("add_salt_pepper: salt_ratio must be in [0, 1]");
  }
  const std::size_t n = img.size();
  const auto k = static_cast<std::size_t>(std::floor(amount * static_cast<double>(n)));
  const auto salt = static_cast<std::size_t>(std::floor(salt_ratio * static_cast<double>(k)));

  // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  NoiseRng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(order[i], order[j]);
  }

  Grid<double> out = img.grid();
  for (std::size_t i = 0; i < k; ++i) out[order[i]] = i < salt ? 1.0 : 0.0;
  return GrayImage(std::move(out));
}

inline GrayImage apply_noise(const GrayImage& img, const NoiseSpec& spec) {
  spec.validate();
  return spec.kind == NoiseSpec::Kind::Gaussian ? add_gaussian_noise(img, spec.mean, spec.sigma, spec.seed)
                                                : add_salt_pepper(img, spec.amount, spec.salt_ratio, spec.seed);
}

/// Sampled 2-D Gaussian density on integer offsets in [-size/2, size/2]^2.
/// Normalized to unit sum unless normalize is false.
inline Grid<double> gaussian_kernel(double sigma, int size, bool normalize = true) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_kernel: sigma must be > 0");
  if (size < 1 || size % 2 == 0) throw std::invalid_argument("gaussian_kernel: size must be odd and >= 1");
  const int half = size / 2;
  const double two_s2 = 2.0 * sigma * sigma;
  const double peak = 1.0 / (std::numbers::pi * two_s2);
  Grid<double> k(static_cast<std::size_t>(size), static_cast<std::size_t>(size));
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      k(static_cast<std::size_t>(dy + half), static_cast<std::size_t>(dx + half)) =
          peak * std::exp(-(dx * dx + dy * dy) / two_s2);
    }
  }
  if (normalize) {
    const double total = std::accumulate(k.begin(), k.end(), 0.0);
    for (double& v : k) v /= total;
  }
  return k;
}

inline GrayImage gaussian_filter(const GrayImage& img, double sigma, int size) {
  const auto kernel = gaussian_kernel(sigma, size);
  const int half = size / 2;
  Grid<double> out(img.rows(), img.cols());
  for (std::size_t r = 0; r < img.rows(); ++r) {
    for (std::size_t c = 0; c < img.cols(); ++c) {
      double acc = 0.0;
      for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx) {
          acc += kernel(static_cast<std::size_t>(dy + half), static_cast<std::size_t>(dx + half)) *
                 img.clamped(static_cast<std::ptrdiff_t>(r) + dy, static_cast<std::ptrdiff_t>(c) + dx);
        }
      }
      out(r, c) = acc;
    }
  }
  return GrayImage(std::move(out));
}

inline GrayImage median_filter(const GrayImage& img, int window) {
  if (window < 1 || window % 2 == 0) throw std::invalid_argument("median_filter: window must be odd and >= 1");
  const int half = window / 2;
  std::vector<double> buf(static_cast<std::size_t>(window * window));
  const auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
  Grid<double> out(img.rows(), img.cols());
  for (std::size_t r = 0; r < img.rows(); ++r) {
    for (std::size_t c = 0; c < img.cols(); ++c) {
      std::size_t n = 0;
      for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx) {
          buf[n++] = img.clamped(static_cast<std::ptrdiff_t>(r) + dy, static_cast<std::ptrdiff_t>(c) + dx);
        }
      }
      std::nth_element(buf.begin(), mid, buf.end());
      out(r, c) = *mid;
    }
  }
  return GrayImage(std::move(out));
}

inline GrayImage apply_filter(const GrayImage& img, const FilterSpec& spec) {
  spec.validate();
  return spec.kind == FilterSpec::Kind::Gaussian ? gaussian_filter(img, spec.sigma, spec.kernel_size)
                                                 : median_filter(img, spec.window);
}

}  // namespace chanvese
