#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "chanvese/finite_difference.hpp"
#include "chanvese/image.hpp"
#include "chanvese/levelset.hpp"

namespace chanvese {

/// Region weight sums below this fall back to the global image mean.
inline constexpr double kDegenerateWeight = 1e-8;

struct RegionMeans {
  double inside = 0.0;   // c1
  double outside = 0.0;  // c2
};

/// Heaviside-weighted mean intensity inside and outside the contour.
inline RegionMeans region_means(const GrayImage& img, const LevelSet& ls, double eps) {
  require_same_shape(img.grid(), ls.phi, "region_means");
  double w_in = 0.0, s_in = 0.0, w_out = 0.0, s_out = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double hin = heaviside_eps(ls.phi[i], eps);
    const double hout = heaviside_eps(-ls.phi[i], eps);  // 1 - H without cancellation
    w_in += hin;
    s_in += hin * img[i];
    w_out += hout;
    s_out += hout * img[i];
  }
  const double global = img.mean();
  RegionMeans m;
  m.inside = w_in < kDegenerateWeight ? global : s_in / w_in;
  m.outside = w_out < kDegenerateWeight ? global : s_out / w_out;
  return m;
}

/// Discrete Chan-Vese energy of phi, each pixel weighted by h^2.
inline double energy(const GrayImage& img, const LevelSet& ls, const CvParams& p) {
  require_same_shape(img.grid(), ls.phi, "energy");
  const auto [c1, c2] = region_means(img, ls, p.eps);
  const auto grad = gradient_norm(ls.phi, ls.h);
  double length = 0.0, area = 0.0, fit_in = 0.0, fit_out = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double phi = ls.phi[i];
    const double hin = heaviside_eps(phi, p.eps);
    const double hout = heaviside_eps(-phi, p.eps);
    const double din = img[i] - c1;
    const double dout = img[i] - c2;
    length += dirac_eps(phi, p.eps) * grad[i];
    area += hin;
    fit_in += din * din * hin;
    fit_out += dout * dout * hout;
  }
  const double cell = ls.h * ls.h;
  return cell * (p.mu * length + p.nu * area + p.lambda1 * fit_in + p.lambda2 * fit_out);
}

struct StepResult {
  LevelSet ls;
  std::size_t changed = 0;  // pixels with |delta phi| >= dt * h^2
};

/// One explicit Euler step of the Chan-Vese evolution, computed from a frozen
/// copy of phi.
inline StepResult evolve_step(const GrayImage& img, const LevelSet& ls, double c1, double c2,
                              const CvParams& p) {
  require_same_shape(img.grid(), ls.phi, "evolve_step");
  const auto kappa = curvature(ls);
  const double threshold = p.dt * ls.h * ls.h;
  StepResult out{ls, 0};
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double u = img[i];
    const double force =
        p.mu * kappa[i] - p.nu - p.lambda1 * (u - c1) * (u - c1) + p.lambda2 * (u - c2) * (u - c2);
    const double delta = p.dt * dirac_eps(ls.phi[i], p.eps) * force;
    out.ls.phi[i] = ls.phi[i] + delta;
    if (std::abs(delta) >= threshold) ++out.changed;
  }
  return out;
}

/// Relaxes phi toward a signed distance function with the same zero level set.
///
/// Iterates phi <- phi - dtau * S(phi0) * (|grad phi| - 1), where S is the
/// smoothed sign z / sqrt(z^2 + h^2) of the input and |grad phi| uses Godunov
/// upwinding of one-sided differences. Requires dtau <= h / 2.
inline LevelSet reinitialize(const LevelSet& ls, int steps, double dtau) {
  const double h = ls.h;
  if (!(dtau > 0.0) || dtau > 0.5 * h) {
    throw std::invalid_argument("reinitialize: dtau must lie in (0, h/2]");
  }
  if (steps < 0) throw std::invalid_argument("reinitialize: steps must be >= 0");

  const Grid<double>& phi0 = ls.phi;
  Grid<double> sign(phi0.rows(), phi0.cols());
  for (std::size_t i = 0; i < phi0.size(); ++i) sign[i] = phi0[i] / std::sqrt(phi0[i] * phi0[i] + h * h);

  Grid<double> cur = phi0;
  Grid<double> next = phi0;
  const double invh = 1.0 / h;
  const auto rows = static_cast<std::ptrdiff_t>(cur.rows());
  const auto cols = static_cast<std::ptrdiff_t>(cur.cols());
  // Ghost cells extrapolate linearly.
  auto at = [&](std::ptrdiff_t r, std::ptrdiff_t c) {
    if (r < 0) return rows > 1 ? 2.0 * cur(0, c) - cur(1, c) : cur(0, c);
    if (r >= rows) return rows > 1 ? 2.0 * cur(rows - 1, c) - cur(rows - 2, c) : cur(rows - 1, c);
    if (c < 0) return cols > 1 ? 2.0 * cur(r, 0) - cur(r, 1) : cur(r, 0);
    if (c >= cols) return cols > 1 ? 2.0 * cur(r, cols - 1) - cur(r, cols - 2) : cur(r, cols - 1);
    return cur(r, c);
  };
  for (int step = 0; step < steps; ++step) {
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
      for (std::ptrdiff_t c = 0; c < cols; ++c) {
        const double s = sign(r, c);
        const double f = cur(r, c);
        const double a = (f - at(r, c - 1)) * invh;   // backward x
        const double b = (at(r, c + 1) - f) * invh;   // forward x
        const double cm = (f - at(r - 1, c)) * invh;  // backward y
        const double dp = (at(r + 1, c) - f) * invh;  // forward y

        double grad2 = 0.0;
        if (s > 0.0) {
          const double ap = std::max(a, 0.0), bm = std::min(b, 0.0);
          const double cp = std::max(cm, 0.0), dm = std::min(dp, 0.0);
          grad2 = std::max(ap * ap, bm * bm) + std::max(cp * cp, dm * dm);
        } else if (s < 0.0) {
          const double am = std::min(a, 0.0), bp = std::max(b, 0.0);
          const double cmm = std::min(cm, 0.0), dpp = std::max(dp, 0.0);
          grad2 = std::max(am * am, bp * bp) + std::max(cmm * cmm, dpp * dpp);
        } else {
          next(r, c) = f;
          continue;
        }
        next(r, c) = f - dtau * s * (std::sqrt(grad2) - 1.0);
      }
    }
    std::swap(cur, next);
  }
  return LevelSet(std::move(cur), h);
}

/// True when at least stationary_fraction of the pixels moved by less than dt * h^2.
inline bool is_stationary(const LevelSet& prev, const LevelSet& next, const CvParams& p) {
  require_same_shape(prev.phi, next.phi, "is_stationary");
  const double threshold = p.dt * p.h * p.h;
  std::size_t still = 0;
  for (std::size_t i = 0; i < prev.phi.size(); ++i) {
    if (std::abs(next.phi[i] - prev.phi[i]) < threshold) ++still;
  }
  return static_cast<double>(still) >= p.stationary_fraction * static_cast<double>(prev.phi.size());
}

struct SegResult {
  BinaryMask mask;
  LevelSet final_ls;
  int iterations = 0;
  bool converged = false;
  std::vector<double> energy_trace;  // iterations + 1 entries, initial energy first
  double final_c1 = 0.0;
  double final_c2 = 0.0;
};

/// Runs the Chan-Vese level set evolution from init until phi is stationary
/// or max_iters is reached.
///
/// Each iteration recomputes the region means, takes one evolution step and,
/// every reinit_every iterations, reinitializes phi. With reinitialization on,
/// stationarity compares consecutive reinitialized iterates, one cycle apart;
/// with reinit_every == 0 it compares consecutive iterates. The zero-level
/// mask must also be unchanged since the previous check.
inline SegResult segment(const GrayImage& img, const LevelSet& init, const CvParams& p) {
  p.validate();
  require_same_shape(img.grid(), init.phi, "segment");
  if (!init.all_finite()) throw std::invalid_argument("segment: initial level set has non-finite values");

  LevelSet ls = init;
  ls.h = p.h;
  SegResult res;
  res.energy_trace.push_back(energy(img, ls, p));
  LevelSet checkpoint = ls;

  for (int it = 0; it < p.max_iters; ++it) {
    const auto [c1, c2] = region_means(img, ls, p.eps);
    auto step = evolve_step(img, ls, c1, c2, p);
    bool check = p.reinit_every == 0;
    if (p.reinit_every > 0 && (it + 1) % p.reinit_every == 0) {
      step.ls = reinitialize(step.ls, p.reinit_steps, 0.5 * p.h);
      check = true;
    }
    if (p.reinit_every == 0) checkpoint = ls;
    ls = std::move(step.ls);
    ++res.iterations;
    res.energy_trace.push_back(energy(img, ls, p));
    if (check) {
      const bool stationary =
          is_stationary(checkpoint, ls, p) && mask_from_levelset(checkpoint) == mask_from_levelset(ls);
      checkpoint = ls;
      if (stationary) {
        res.converged = true;
        break;
      }
    }
  }

  const auto means = region_means(img, ls, p.eps);
  res.final_c1 = means.inside;
  res.final_c2 = means.outside;
  res.mask = mask_from_levelset(ls);
  res.final_ls = std::move(ls);
  return res;
}

}  // namespace chanvese
