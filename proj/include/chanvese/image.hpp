#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <tuple>

#include "chanvese/grid.hpp"

namespace chanvese {

/// Single-channel image with intensities normalized to [0, 1].
///
/// Values are clamped on construction (NaN becomes 0), so every GrayImage
/// satisfies the range invariant. There is no mutable element access; build
/// a Grid<double>, then wrap it.
class GrayImage {
 public:
  GrayImage() = default;

  GrayImage(std::size_t rows, std::size_t cols, double fill = 0.0)
      : GrayImage(Grid<double>(rows, cols, fill)) {}

  GrayImage(std::size_t rows, std::size_t cols, std::vector<double> data)
      : GrayImage(Grid<double>(rows, cols, std::move(data))) {}

  explicit GrayImage(Grid<double> grid) : grid_(std::move(grid)) {
    if (grid_.rows() == 0 || grid_.cols() == 0) {
      throw std::invalid_argument("GrayImage: dimensions must be positive");
    }
    for (double& v : grid_) {
      v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
    }
  }

  std::size_t rows() const noexcept { return grid_.rows(); }
  std::size_t cols() const noexcept { return grid_.cols(); }
  std::size_t size() const noexcept { return grid_.size(); }

  double operator()(std::size_t r, std::size_t c) const { return grid_(r, c); }
  double operator[](std::size_t i) const { return grid_[i]; }
  double clamped(std::ptrdiff_t r, std::ptrdiff_t c) const { return grid_.clamped(r, c); }

  std::span<const double> values() const noexcept { return grid_.values(); }
  const Grid<double>& grid() const noexcept { return grid_; }

  double mean() const {
    return std::accumulate(grid_.begin(), grid_.end(), 0.0) / static_cast<double>(grid_.size());
  }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  Grid<double> grid_;
};

/// Three equally shaped channels.
class RgbImage {
 public:
  RgbImage() = default;

  RgbImage(GrayImage r, GrayImage g, GrayImage b)
      : channels_{std::move(r), std::move(g), std::move(b)} {
    require_same_shape(channels_[0].grid(), channels_[1].grid(), "RgbImage r/g");
    require_same_shape(channels_[0].grid(), channels_[2].grid(), "RgbImage r/b");
  }

  std::size_t rows() const noexcept { return channels_[0].rows(); }
  std::size_t cols() const noexcept { return channels_[0].cols(); }

  const GrayImage& r() const noexcept { return channels_[0]; }
  const GrayImage& g() const noexcept { return channels_[1]; }
  const GrayImage& b() const noexcept { return channels_[2]; }
  const GrayImage& channel(std::size_t i) const { return channels_.at(i); }
  const std::array<GrayImage, 3>& channels() const noexcept { return channels_; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::array<GrayImage, 3> channels_;
};

/// Per-pixel segmentation decision, stored as 0/1 bytes.
class BinaryMask : public Grid<std::uint8_t> {
 public:
  using Grid<std::uint8_t>::Grid;
  BinaryMask() = default;
  explicit BinaryMask(Grid<std::uint8_t> g) : Grid<std::uint8_t>(std::move(g)) {}

  std::size_t count() const {
    return static_cast<std::size_t>(std::count_if(begin(), end(), [](std::uint8_t v) { return v != 0; }));
  }

  /// True pixel with at least one false 4-neighbour inside the grid.
  bool is_boundary(std::size_t r, std::size_t c) const {
    if (!(*this)(r, c)) return false;
    if (r > 0 && !(*this)(r - 1, c)) return true;
    if (r + 1 < rows() && !(*this)(r + 1, c)) return true;
    if (c > 0 && !(*this)(r, c - 1)) return true;
    if (c + 1 < cols() && !(*this)(r, c + 1)) return true;
    return false;
  }
};

inline std::tuple<GrayImage, GrayImage, GrayImage> split_channels(const RgbImage& img) {
  return {img.r(), img.g(), img.b()};
}

inline RgbImage merge_channels(GrayImage r, GrayImage g, GrayImage b) {
  return RgbImage(std::move(r), std::move(g), std::move(b));
}

/// Paints mask boundary pixels white. Interior and exterior pixels are left alone.
inline GrayImage overlay_contour(const GrayImage& img, const BinaryMask& mask) {
  require_same_shape(img.grid(), mask, "overlay_contour");
  Grid<double> out = img.grid();
  for (std::size_t r = 0; r < mask.rows(); ++r) {
    for (std::size_t c = 0; c < mask.cols(); ++c) {
      if (mask.is_boundary(r, c)) out(r, c) = 1.0;
    }
  }
  return GrayImage(std::move(out));
}

inline RgbImage overlay_contour(const RgbImage& img, const BinaryMask& mask) {
  return RgbImage(overlay_contour(img.r(), mask), overlay_contour(img.g(), mask),
                  overlay_contour(img.b(), mask));
}

/// Mask rendered as a 0/1 image, for writing to disk.
inline GrayImage mask_to_image(const BinaryMask& mask) {
  Grid<double> out(mask.rows(), mask.cols());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? 1.0 : 0.0;
  return GrayImage(std::move(out));
}

/// Pixels at or above one half are true.
inline BinaryMask image_to_mask(const GrayImage& img) {
  BinaryMask out(img.rows(), img.cols());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = img[i] >= 0.5 ? 1 : 0;
  return out;
}

}  // namespace chanvese
