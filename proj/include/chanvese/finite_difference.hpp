#pragma once

// Central-difference stencils on a level set grid. Out-of-range neighbours
// replicate the nearest edge value (zero normal derivative).

#include <cmath>

#include "chanvese/levelset.hpp"

namespace chanvese {

/// Denominator floor inside (phi_x^2 + phi_y^2 + floor)^(3/2).
inline constexpr double kCurvatureFloor = 1e-8;

struct Gradient {
  Grid<double> dx;
  Grid<double> dy;
};

inline Gradient central_gradient(const Grid<double>& f, double h) {
  Gradient g{Grid<double>(f.rows(), f.cols()), Grid<double>(f.rows(), f.cols())};
  const double inv2h = 1.0 / (2.0 * h);
  for (std::size_t r = 0; r < f.rows(); ++r) {
    const auto ri = static_cast<std::ptrdiff_t>(r);
    for (std::size_t c = 0; c < f.cols(); ++c) {
      const auto ci = static_cast<std::ptrdiff_t>(c);
      g.dx(r, c) = (f.clamped(ri, ci + 1) - f.clamped(ri, ci - 1)) * inv2h;
      g.dy(r, c) = (f.clamped(ri + 1, ci) - f.clamped(ri - 1, ci)) * inv2h;
    }
  }
  return g;
}

inline Grid<double> gradient_norm(const Grid<double>& f, double h) {
  const auto g = central_gradient(f, h);
  Grid<double> out(f.rows(), f.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::hypot(g.dx[i], g.dy[i]);
  return out;
}

/// Mean curvature of the level sets of phi,
///   (phi_xx phi_y^2 - 2 phi_xy phi_x phi_y + phi_yy phi_x^2) / |grad phi|^3.
/// With phi positive inside, a circle of radius rho has curvature -1/rho.
inline Grid<double> curvature(const LevelSet& ls) {
  const auto& f = ls.phi;
  const double h = ls.h;
  const double inv2h = 1.0 / (2.0 * h);
  const double invh2 = 1.0 / (h * h);
  const double inv4h2 = 1.0 / (4.0 * h * h);
  Grid<double> kappa(f.rows(), f.cols());
  for (std::size_t r = 0; r < f.rows(); ++r) {
    const auto ri = static_cast<std::ptrdiff_t>(r);
    for (std::size_t c = 0; c < f.cols(); ++c) {
      const auto ci = static_cast<std::ptrdiff_t>(c);
      const double center = f(r, c);
      const double east = f.clamped(ri, ci + 1);
      const double west = f.clamped(ri, ci - 1);
      const double south = f.clamped(ri + 1, ci);
      const double north = f.clamped(ri - 1, ci);

      const double fx = (east - west) * inv2h;
      const double fy = (south - north) * inv2h;
      const double fxx = (east - 2.0 * center + west) * invh2;
      const double fyy = (south - 2.0 * center + north) * invh2;
      const double fxy = (f.clamped(ri + 1, ci + 1) - f.clamped(ri + 1, ci - 1) - f.clamped(ri - 1, ci + 1) +
                          f.clamped(ri - 1, ci - 1)) *
                         inv4h2;

      const double num = fxx * fy * fy - 2.0 * fxy * fx * fy + fyy * fx * fx;
      const double den = std::pow(fx * fx + fy * fy + kCurvatureFloor, 1.5);
      kappa(r, c) = num / den;
    }
  }
  return kappa;
}

}  // namespace chanvese
