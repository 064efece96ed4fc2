#pragma once

// Differentiable Chan-Vese loss for RGB images.
//
// A logit field is relaxed to a soft mask with a tanh step. Per channel the
// loss charges squared deviation from the soft inside/outside means, the three
// channel terms are averaged, and a total-variation style smoothness term on
// the soft mask is added. The region means are treated as constants when
// differentiating; the detached gradient equals the full one.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "chanvese/image.hpp"
#include "chanvese/preprocess.hpp"
#include "chanvese/solver.hpp"

namespace chanvese {

/// Regularizer inside the square root of the smoothness norm.
inline constexpr double kSmoothFloor = 1e-12;

struct PredictionField {
  Grid<double> logits;

  PredictionField() = default;
  explicit PredictionField(Grid<double> values) : logits(std::move(values)) {
    for (double v : logits) {
      if (!std::isfinite(v)) throw std::invalid_argument("PredictionField: logits must be finite");
    }
  }

  std::size_t rows() const noexcept { return logits.rows(); }
  std::size_t cols() const noexcept { return logits.cols(); }
};

struct LossParams {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double mu_smooth = 0.1;
  double eps_tanh = 1.0;

  void validate() const {
    if (!(lambda1 > 0.0)) throw std::invalid_argument("lambda1: must be > 0");
    if (!(lambda2 > 0.0)) throw std::invalid_argument("lambda2: must be > 0");
    if (!(mu_smooth >= 0.0)) throw std::invalid_argument("mu_smooth: must be >= 0");
    if (!(eps_tanh > 0.0)) throw std::invalid_argument("eps_tanh: must be > 0");
  }
};

struct LossBreakdown {
  std::array<double, 3> intensity_per_channel{};
  double intensity_mean = 0.0;
  double smoothness = 0.0;
  double total = 0.0;
  std::array<RegionMeans, 3> means{};
};

inline double smooth_heaviside(double x, double eps_tanh) { return 0.5 * (1.0 + std::tanh(x / eps_tanh)); }

inline double smooth_heaviside_derivative(double x, double eps_tanh) {
  const double t = std::tanh(x / eps_tanh);
  return 0.5 / eps_tanh * (1.0 - t * t);
}

inline Grid<double> soft_mask(const PredictionField& pred, double eps_tanh) {
  Grid<double> h(pred.rows(), pred.cols());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = smooth_heaviside(pred.logits[i], eps_tanh);
  return h;
}

/// Per-channel soft inside/outside means, with the region_means fallback.
inline std::array<RegionMeans, 3> mean_intensities_rgb(const RgbImage& img, const Grid<double>& hfield) {
  require_same_shape(img.r().grid(), hfield, "mean_intensities_rgb");
  std::array<RegionMeans, 3> out{};
  for (std::size_t c = 0; c < 3; ++c) {
    const GrayImage& ch = img.channel(c);
    double w_in = 0.0, s_in = 0.0, w_out = 0.0, s_out = 0.0;
    for (std::size_t i = 0; i < ch.size(); ++i) {
      w_in += hfield[i];
      s_in += hfield[i] * ch[i];
      w_out += 1.0 - hfield[i];
      s_out += (1.0 - hfield[i]) * ch[i];
    }
    const double global = ch.mean();
    out[c].inside = w_in < kDegenerateWeight ? global : s_in / w_in;
    out[c].outside = w_out < kDegenerateWeight ? global : s_out / w_out;
  }
  return out;
}

namespace detail {

// Forward differences of the soft mask; zero across the last row/column.
struct SmoothTerms {
  Grid<double> gx, gy, norm;
};

inline SmoothTerms smoothness_terms(const Grid<double>& h) {
  SmoothTerms t{Grid<double>(h.rows(), h.cols()), Grid<double>(h.rows(), h.cols()),
                Grid<double>(h.rows(), h.cols())};
  for (std::size_t r = 0; r < h.rows(); ++r) {
    for (std::size_t c = 0; c < h.cols(); ++c) {
      const double gx = c + 1 < h.cols() ? h(r, c + 1) - h(r, c) : 0.0;
      const double gy = r + 1 < h.rows() ? h(r + 1, c) - h(r, c) : 0.0;
      t.gx(r, c) = gx;
      t.gy(r, c) = gy;
      t.norm(r, c) = std::sqrt(gx * gx + gy * gy + kSmoothFloor);
    }
  }
  return t;
}

}  // namespace detail

inline LossBreakdown cv_loss_forward(const RgbImage& img, const PredictionField& pred, const LossParams& p) {
  p.validate();
  require_same_shape(img.r().grid(), pred.logits, "cv_loss_forward");
  const auto h = soft_mask(pred, p.eps_tanh);
  const double n = static_cast<double>(h.size());

  LossBreakdown out;
  out.means = mean_intensities_rgb(img, h);
  for (std::size_t c = 0; c < 3; ++c) {
    const GrayImage& ch = img.channel(c);
    const auto [c1, c2] = out.means[c];
    double in = 0.0, outside = 0.0;
    for (std::size_t i = 0; i < ch.size(); ++i) {
      const double din = ch[i] - c1;
      const double dout = ch[i] - c2;
      in += din * din * h[i];
      outside += dout * dout * (1.0 - h[i]);
    }
    out.intensity_per_channel[c] = (p.lambda1 * in + p.lambda2 * outside) / n;
  }
  out.intensity_mean =
      (out.intensity_per_channel[0] + out.intensity_per_channel[1] + out.intensity_per_channel[2]) / 3.0;

  const auto terms = detail::smoothness_terms(h);
  double smooth = 0.0;
  for (double v : terms.norm) smooth += v;
  out.smoothness = smooth / n;
  out.total = out.intensity_mean + p.mu_smooth * out.smoothness;
  return out;
}

/// d total / d logit for every pixel.
inline Grid<double> cv_loss_grad(const RgbImage& img, const PredictionField& pred, const LossParams& p) {
  p.validate();
  require_same_shape(img.r().grid(), pred.logits, "cv_loss_grad");
  const auto h = soft_mask(pred, p.eps_tanh);
  const double n = static_cast<double>(h.size());
  const auto means = mean_intensities_rgb(img, h);

  // d total / d H, intensity part.
  Grid<double> dh(h.rows(), h.cols(), 0.0);
  for (std::size_t c = 0; c < 3; ++c) {
    const GrayImage& ch = img.channel(c);
    const auto [c1, c2] = means[c];
    for (std::size_t i = 0; i < ch.size(); ++i) {
      const double din = ch[i] - c1;
      const double dout = ch[i] - c2;
      dh[i] += (p.lambda1 * din * din - p.lambda2 * dout * dout) / (3.0 * n);
    }
  }

  // Smoothness part: each forward difference touches two pixels.
  if (p.mu_smooth > 0.0) {
    const auto t = detail::smoothness_terms(h);
    const double scale = p.mu_smooth / n;
    for (std::size_t r = 0; r < h.rows(); ++r) {
      for (std::size_t c = 0; c < h.cols(); ++c) {
        const double inv = scale / t.norm(r, c);
        if (c + 1 < h.cols()) {
          dh(r, c + 1) += t.gx(r, c) * inv;
          dh(r, c) -= t.gx(r, c) * inv;
        }
        if (r + 1 < h.rows()) {
          dh(r + 1, c) += t.gy(r, c) * inv;
          dh(r, c) -= t.gy(r, c) * inv;
        }
      }
    }
  }

  for (std::size_t i = 0; i < dh.size(); ++i) dh[i] *= smooth_heaviside_derivative(pred.logits[i], p.eps_tanh);
  return dh;
}

/// Central-difference derivative of the total loss at the given flat pixel
/// indices. Each probe costs two forward evaluations.
inline std::vector<double> finite_diff_grad(const RgbImage& img, const PredictionField& pred, const LossParams& p,
                                            double step, std::span<const std::size_t> probes) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_diff_grad: step must be > 0");
  std::vector<double> out;
  out.reserve(probes.size());
  PredictionField work = pred;
  for (std::size_t idx : probes) {
    const double base = work.logits[idx];
    work.logits[idx] = base + step;
    const double up = cv_loss_forward(img, work, p).total;
    work.logits[idx] = base - step;
    const double down = cv_loss_forward(img, work, p).total;
    work.logits[idx] = base;
    out.push_back((up - down) / (2.0 * step));
  }
  return out;
}

/// Full-grid finite-difference gradient. Quadratic cost; meant for small grids.
inline Grid<double> finite_diff_grad(const RgbImage& img, const PredictionField& pred, const LossParams& p,
                                     double step) {
  std::vector<std::size_t> all(pred.logits.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return Grid<double>(pred.rows(), pred.cols(), finite_diff_grad(img, pred, p, step, all));
}

/// Largest |a - b| / max(|a|, |b|, floor) over paired samples.
inline double max_relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-12) {
  if (a.size() != b.size()) throw std::invalid_argument("max_relative_error: length mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

struct RefineResult {
  PredictionField field;
  std::vector<double> loss_trace;  // steps + 1 totals, initial first
};

/// Plain gradient descent on the logits.
inline RefineResult refine(const RgbImage& img, const PredictionField& pred0, const LossParams& p,
                           double learning_rate, int steps) {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("refine: learning_rate must be > 0");
  if (steps < 0) throw std::invalid_argument("refine: steps must be >= 0");
  RefineResult res{pred0, {}};
  res.loss_trace.reserve(static_cast<std::size_t>(steps) + 1);
  res.loss_trace.push_back(cv_loss_forward(img, res.field, p).total);
  for (int s = 0; s < steps; ++s) {
    const auto g = cv_loss_grad(img, res.field, p);
    for (std::size_t i = 0; i < g.size(); ++i) res.field.logits[i] -= learning_rate * g[i];
    res.loss_trace.push_back(cv_loss_forward(img, res.field, p).total);
  }
  return res;
}

/// Logit > 0 is inside.
inline BinaryMask threshold_logits(const PredictionField& pred) {
  BinaryMask m(pred.rows(), pred.cols());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = pred.logits[i] > 0.0 ? 1 : 0;
  return m;
}

/// Starting logits for refinement: a weak centered-circle prior
/// (prior_scale times the default circle level set) plus uniform noise in
/// [-noise, noise].
inline PredictionField seeded_logits(std::size_t rows, std::size_t cols, std::uint64_t seed, double prior_scale = 0.05,
                                     double noise = 0.5) {
  const auto prior = default_init(rows, cols);
  NoiseRng rng(seed);
  Grid<double> logits(rows, cols);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    logits[i] = prior_scale * prior.phi[i] + noise * (2.0 * rng.uniform() - 1.0);
  }
  return PredictionField(std::move(logits));
}

}  // namespace chanvese
