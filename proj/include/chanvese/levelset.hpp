#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "chanvese/grid.hpp"
#include "chanvese/image.hpp"

namespace chanvese {

/// Implicit contour: the zero level set of phi. Positive values are inside.
/// Pixel (row, col) sits at coordinates x = col, y = row; h is the spacing
/// used by finite differences.
struct LevelSet {
  Grid<double> phi;
  double h = 1.0;

  LevelSet() = default;
  LevelSet(Grid<double> values, double spacing = 1.0) : phi(std::move(values)), h(spacing) {
    if (!(h > 0.0)) throw std::invalid_argument("LevelSet: spacing h must be > 0");
  }

  std::size_t rows() const noexcept { return phi.rows(); }
  std::size_t cols() const noexcept { return phi.cols(); }

  bool all_finite() const {
    for (double v : phi) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }
};

/// Chan-Vese model weights and solver controls.
struct CvParams {
  double mu = 0.2;       // contour length weight
  double nu = 0.0;       // area weight
  double lambda1 = 1.0;  // inside fit weight
  double lambda2 = 1.0;  // outside fit weight
  double dt = 0.5;
  double eps = 1.0;  // Heaviside/Dirac regularization width
  double h = 1.0;
  double stationary_fraction = 0.999;
  int max_iters = 500;
  int reinit_every = 10;  // 0 disables reinitialization
  int reinit_steps = 10;

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const {
    auto fail = [](const char* field, const char* rule) {
      throw std::invalid_argument(std::string(field) + ": " + rule);
    };
    if (!(mu >= 0.0)) fail("mu", "must be >= 0");
    if (!std::isfinite(nu)) fail("nu", "must be finite");
    if (!(lambda1 > 0.0)) fail("lambda1", "must be > 0");
    if (!(lambda2 > 0.0)) fail("lambda2", "must be > 0");
    if (!(dt > 0.0)) fail("dt", "must be > 0");
    if (!(eps > 0.0)) fail("eps", "must be > 0");
    if (!(h > 0.0)) fail("h", "must be > 0");
    if (!(stationary_fraction > 0.0 && stationary_fraction <= 1.0)) {
      fail("stationary_fraction", "must be in (0, 1]");
    }
    if (max_iters < 0) fail("max_iters", "must be >= 0");
    if (reinit_every < 0) fail("reinit_every", "must be >= 0");
    if (reinit_steps < 0) fail("reinit_steps", "must be >= 0");
  }
};

/// phi = r - distance to (cx, cy). Lipschitz with constant 1.
inline LevelSet init_circle(std::size_t rows, std::size_t cols, double cx, double cy, double radius,
                            double h = 1.0) {
  if (!(radius > 0.0)) throw std::invalid_argument("init_circle: radius must be > 0");
  Grid<double> phi(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      phi(r, c) = radius - std::hypot(static_cast<double>(c) - cx, static_cast<double>(r) - cy);
    }
  }
  return LevelSet(std::move(phi), h);
}

/// phi = 1 - normalized elliptic radius. Lipschitz with constant max(1/a, 1/b).
inline LevelSet init_ellipse(std::size_t rows, std::size_t cols, double cx, double cy, double a, double b,
                             double h = 1.0) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("init_ellipse: semi-axes must be > 0");
  Grid<double> phi(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      phi(r, c) = 1.0 - std::hypot((static_cast<double>(c) - cx) / a, (static_cast<double>(r) - cy) / b);
    }
  }
  return LevelSet(std::move(phi), h);
}

/// Centered circle with radius min(rows, cols) / 4.
inline LevelSet default_init(std::size_t rows, std::size_t cols, double h = 1.0) {
  const double radius = static_cast<double>(std::min(rows, cols)) / 4.0;
  return init_circle(rows, cols, (static_cast<double>(cols) - 1.0) / 2.0, (static_cast<double>(rows) - 1.0) / 2.0,
                     radius, h);
}

// Arctangent-regularized step function and its derivative.
inline double heaviside_eps(double x, double eps) {
  return 0.5 * (1.0 + (2.0 / std::numbers::pi) * std::atan(x / eps));
}

inline double dirac_eps(double x, double eps) {
  return (1.0 / std::numbers::pi) * eps / (eps * eps + x * x);
}

/// Inside is phi >= 0; the zero level set counts as inside.
inline BinaryMask mask_from_levelset(const LevelSet& ls) {
  BinaryMask mask(ls.rows(), ls.cols());
  for (std::size_t i = 0; i < ls.phi.size(); ++i) mask[i] = ls.phi[i] >= 0.0 ? 1 : 0;
  return mask;
}

}  // namespace chanvese
