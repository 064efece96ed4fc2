#include <gtest/gtest.h>

#include <cmath>

#include "chanvese/cvloss.hpp"
#include "chanvese/fixtures.hpp"
#include "chanvese/metrics.hpp"
#include "test_support.hpp"

using namespace chanvese;

namespace {

PredictionField disk_logits(double inside, double outside, double shift = 0.0) {
  const fixtures::DiskGeometry geo;
  Grid<double> g(geo.rows, geo.cols);
  for (std::size_t r = 0; r < geo.rows; ++r) {
    for (std::size_t c = 0; c < geo.cols; ++c) {
      g(r, c) = std::hypot(c - geo.cx - shift, r - geo.cy) <= geo.radius ? inside : outside;
    }
  }
  return PredictionField(std::move(g));
}

RgbImage uniform_rgb(std::size_t n, double v) { return RgbImage(GrayImage(n, n, v), GrayImage(n, n, v), GrayImage(n, n, v)); }

std::vector<std::size_t> probe_pixels(std::size_t count, std::size_t n, std::uint64_t seed) {
  NoiseRng rng(seed);
  std::vector<std::size_t> out(count);
  for (auto& p : out) p = static_cast<std::size_t>(rng.below(n));
  return out;
}

}  // namespace

TEST(SmoothHeaviside, Values) {
  for (double eps : {0.3, 1.0, 4.0}) {
    EXPECT_EQ(smooth_heaviside(0.0, eps), 0.5);
    for (double x : {0.1, 1.0, 7.5}) EXPECT_NEAR(smooth_heaviside(x, eps) + smooth_heaviside(-x, eps), 1.0, 1e-15);
  }
}

TEST(SmoothHeaviside, DerivativeMatchesFiniteDifference) {
  for (double eps : {0.5, 1.0, 2.0}) {
    EXPECT_DOUBLE_EQ(smooth_heaviside_derivative(0.0, eps), 1.0 / (2.0 * eps));
    for (double x = -4.0; x <= 4.0; x += 0.5) {
      const double fd = (smooth_heaviside(x + 1e-5, eps) - smooth_heaviside(x - 1e-5, eps)) / 2e-5;
      EXPECT_NEAR(fd, smooth_heaviside_derivative(x, eps), 1e-6);
    }
  }
}

TEST(MeanIntensities, UniformChannels) {
  const RgbImage img(GrayImage(6, 6, 0.1), GrayImage(6, 6, 0.5), GrayImage(6, 6, 0.9));
  NoiseRng rng(2);
  Grid<double> h(6, 6);
  for (double& v : h) v = rng.uniform();
  const auto m = mean_intensities_rgb(img, h);
  const double want[3] = {0.1, 0.5, 0.9};
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_NEAR(m[c].inside, want[c], 1e-14);
    EXPECT_NEAR(m[c].outside, want[c], 1e-14);
  }
}

TEST(MeanIntensities, HalfFieldGivesChannelMean) {
  const auto img = fixtures::disk_rgb();
  const auto m = mean_intensities_rgb(img, Grid<double>(128, 128, 0.5));
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_NEAR(m[c].inside, img.channel(c).mean(), 1e-12);
    EXPECT_NEAR(m[c].outside, img.channel(c).mean(), 1e-12);
  }
}

TEST(MeanIntensities, SharpFieldRecoversRegions) {
  const auto img = fixtures::disk_rgb();
  const auto m = mean_intensities_rgb(img, soft_mask(disk_logits(5.0, -5.0), 1.0));
  const double in[3] = {0.9, 0.75, 0.65}, out[3] = {0.1, 0.2, 0.3};
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_NEAR(m[c].inside, in[c], 0.05);
    EXPECT_NEAR(m[c].outside, out[c], 0.05);
  }
}

TEST(LossForward, UniformImageHasNoIntensityTerm) {
  const auto b = cv_loss_forward(uniform_rgb(16, 0.4), seeded_logits(16, 16, 1), LossParams{});
  EXPECT_NEAR(b.intensity_mean, 0.0, 1e-15);
  for (double v : b.intensity_per_channel) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(LossForward, ConstantLogitsSmoothnessIsFloor) {
  const auto b = cv_loss_forward(fixtures::disk_rgb(), PredictionField(Grid<double>(128, 128, 0.7)), LossParams{});
  EXPECT_NEAR(b.smoothness, 1e-6, 1e-12);
}

TEST(LossForward, TotalCombinesTerms) {
  LossParams p;
  p.mu_smooth = 0.25;
  const auto b = cv_loss_forward(fixtures::disk_rgb(), seeded_logits(128, 128, 3), p);
  const double mean = (b.intensity_per_channel[0] + b.intensity_per_channel[1] + b.intensity_per_channel[2]) / 3.0;
  EXPECT_NEAR(b.intensity_mean, mean, 1e-15);
  EXPECT_NEAR(b.total, mean + 0.25 * b.smoothness, 1e-15);
}

TEST(LossForward, MatchingContourBeatsShiftedContour) {
  const auto img = fixtures::disk_rgb();
  const auto good = cv_loss_forward(img, disk_logits(5.0, -5.0), LossParams{});
  const auto shifted = cv_loss_forward(img, disk_logits(5.0, -5.0, 10.0), LossParams{});
  EXPECT_LT(good.intensity_mean, shifted.intensity_mean);
}

// Equal fit weights make the loss blind to which side is called inside.
TEST(LossForward, InvariantUnderNegatedLogitsForEqualWeights) {
  const auto img = fixtures::disk_rgb();
  const auto pred = seeded_logits(128, 128, 4);
  PredictionField neg = pred;
  for (double& v : neg.logits) v = -v;
  const auto a = cv_loss_forward(img, pred, LossParams{});
  const auto b = cv_loss_forward(img, neg, LossParams{});
  EXPECT_NEAR(a.intensity_mean, b.intensity_mean, 1e-12);
  EXPECT_NEAR(a.smoothness, b.smoothness, 1e-12);
}

TEST(LossGrad, UniformImageWithoutSmoothnessIsZero) {
  LossParams p;
  p.mu_smooth = 0.0;
  const auto g = cv_loss_grad(uniform_rgb(12, 0.3), seeded_logits(12, 12, 5), p);
  for (double v : g) EXPECT_NEAR(v, 0.0, 1e-18);
}

TEST(LossGrad, FlatLogitsHaveNoSmoothnessGradient) {
  const auto g = cv_loss_grad(uniform_rgb(12, 0.3), PredictionField(Grid<double>(12, 12, -0.4)), LossParams{});
  for (double v : g) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(LossGrad, MatchesCentralDifferences) {
  const auto img = fixtures::disk_rgb();
  const auto pred = seeded_logits(128, 128, 42);
  const auto probes = probe_pixels(100, 128 * 128, 7);
  const auto full = cv_loss_grad(img, pred, LossParams{});
  std::vector<double> analytic;
  for (auto p : probes) analytic.push_back(full[p]);
  const auto numeric = finite_diff_grad(img, pred, LossParams{}, 1e-4, probes);
  EXPECT_LT(max_relative_error(analytic, numeric), 1e-4);
}

TEST(LossGrad, MatchesOnSmallGridEverywhere) {
  NoiseRng rng(12);
  Grid<double> r(9, 9), g(9, 9), b(9, 9);
  for (std::size_t i = 0; i < 81; ++i) {
    r[i] = rng.uniform();
    g[i] = rng.uniform();
    b[i] = rng.uniform();
  }
  const RgbImage img{GrayImage(r), GrayImage(g), GrayImage(b)};
  LossParams p;
  p.lambda1 = 1.5;
  p.lambda2 = 0.5;
  p.eps_tanh = 0.7;
  const auto pred = seeded_logits(9, 9, 13, 0.2, 1.0);
  const auto analytic = cv_loss_grad(img, pred, p);
  const auto numeric = finite_diff_grad(img, pred, p, 1e-5);
  EXPECT_LT(max_relative_error(analytic.values(), numeric.values()), 1e-5);
}

TEST(FiniteDiff, LargeStepDegradesAgreement) {
  const auto img = fixtures::disk_rgb();
  const auto pred = seeded_logits(128, 128, 42);
  const auto probes = probe_pixels(20, 128 * 128, 8);
  const auto full = cv_loss_grad(img, pred, LossParams{});
  std::vector<double> analytic;
  for (auto p : probes) analytic.push_back(full[p]);
  const double fine = max_relative_error(analytic, finite_diff_grad(img, pred, LossParams{}, 1e-4, probes));
  const double coarse = max_relative_error(analytic, finite_diff_grad(img, pred, LossParams{}, 0.5, probes));
  EXPECT_GT(coarse, 10.0 * fine);
}

TEST(FiniteDiff, ProbeAndFullGridAgree) {
  const auto img = fixtures::disk_rgb(fixtures::DiskGeometry{12, 10, 5.0, 6.0, 3.0});
  const auto pred = seeded_logits(12, 10, 6);
  const auto full = finite_diff_grad(img, pred, LossParams{}, 1e-4);
  const std::vector<std::size_t> probes = {0, 17, 119};
  const auto some = finite_diff_grad(img, pred, LossParams{}, 1e-4, probes);
  for (std::size_t k = 0; k < probes.size(); ++k) EXPECT_EQ(some[k], full[probes[k]]);
}

TEST(Refine, ZeroStepsIsIdentity) {
  const auto pred = seeded_logits(32, 32, 9);
  const auto res = refine(uniform_rgb(32, 0.2), pred, LossParams{}, 1.0, 0);
  EXPECT_EQ(res.field.logits, pred.logits);
  EXPECT_EQ(res.loss_trace.size(), 1u);
}

TEST(Refine, UnitRateLowersLoss) {
  const auto res = refine(fixtures::disk_rgb(), seeded_logits(128, 128, 42), LossParams{}, 1.0, 200);
  EXPECT_LT(res.loss_trace.back(), res.loss_trace.front());
}

TEST(Refine, SmallRateDescendsMonotonically) {
  const auto res = refine(fixtures::disk_rgb(), seeded_logits(128, 128, 42), LossParams{}, 0.1, 20);
  for (std::size_t i = 1; i < res.loss_trace.size(); ++i) EXPECT_LT(res.loss_trace[i], res.loss_trace[i - 1]);
}

TEST(Refine, ReachesDiskAtDefaultRate) {
  const auto res = refine(fixtures::disk_rgb(), seeded_logits(128, 128, 42), LossParams{}, 1000.0, 200);
  EXPECT_GE(dice(threshold_logits(res.field), fixtures::disk_truth()), 0.9);
  EXPECT_LT(res.loss_trace.back(), res.loss_trace.front());
}

TEST(Refine, RejectsBadArguments) {
  const auto pred = seeded_logits(4, 4, 1);
  EXPECT_THROW(refine(uniform_rgb(4, 0.1), pred, LossParams{}, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(refine(uniform_rgb(4, 0.1), pred, LossParams{}, 1.0, -1), std::invalid_argument);
}

TEST(PredictionField, RejectsNonFinite) {
  Grid<double> g(2, 2, 0.0);
  g[3] = std::nan("");
  EXPECT_THROW(PredictionField{g}, std::invalid_argument);
}
