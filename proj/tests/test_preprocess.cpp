#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "chanvese/fixtures.hpp"
#include "chanvese/preprocess.hpp"
#include "test_support.hpp"

using namespace chanvese;
using chanvese::testing::random_gray;

namespace {

double variance(const GrayImage& img) {
  const double m = img.mean();
  double acc = 0.0;
  for (double v : img.values()) acc += (v - m) * (v - m);
  return acc / static_cast<double>(img.size());
}

}  // namespace

TEST(NoiseRng, SameSeedSameStream) {
  NoiseRng a(77), b(77), c(78);
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    if (i == 0) {
      EXPECT_NE(x, c.normal());
    }
  }
}

TEST(NoiseRng, BelowStaysInRange) {
  NoiseRng rng(3);
  for (int i = 0; i < 10000; ++i) EXPECT_LT(rng.below(7), 7u);
}

TEST(GaussianNoise, ZeroSigmaZeroMeanIsIdentity) {
  const auto img = random_gray(9, 9, 1);
  EXPECT_EQ(add_gaussian_noise(img, 0.0, 0.0, 5), img);
}

TEST(GaussianNoise, ZeroSigmaShifts) {
  const auto out = add_gaussian_noise(GrayImage(4, 4, 0.5), 0.3, 0.0, 5);
  for (double v : out.values()) EXPECT_NEAR(v, 0.8, 1e-15);
}

TEST(GaussianNoise, SampleMoments) {
  const auto out = add_gaussian_noise(GrayImage(128, 128, 0.5), 0.0, 0.1, 42);
  EXPECT_NEAR(out.mean(), 0.5, 0.01);
  EXPECT_NEAR(std::sqrt(variance(out)), 0.1, 0.01);
}

TEST(GaussianNoise, ClampsToUnitRange) {
  const auto out = add_gaussian_noise(GrayImage(32, 32, 0.95), 0.0, 0.5, 2);
  for (double v : out.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(GaussianNoise, Deterministic) {
  const auto img = random_gray(16, 16, 4);
  EXPECT_EQ(add_gaussian_noise(img, 0.0, 0.2, 9), add_gaussian_noise(img, 0.0, 0.2, 9));
  EXPECT_NE(add_gaussian_noise(img, 0.0, 0.2, 9), add_gaussian_noise(img, 0.0, 0.2, 10));
}

TEST(SaltPepper, ZeroAmountIsIdentity) {
  const auto img = random_gray(9, 9, 1);
  EXPECT_EQ(add_salt_pepper(img, 0.0, 0.5, 5), img);
}

TEST(SaltPepper, FullSaltIsWhite) {
  const auto out = add_salt_pepper(random_gray(9, 9, 1), 1.0, 1.0, 5);
  for (double v : out.values()) EXPECT_EQ(v, 1.0);
}

TEST(SaltPepper, ExactPixelCount) {
  const GrayImage img(100, 100, 0.4);
  const auto out = add_salt_pepper(img, 0.05, 0.5, 42);
  int changed = 0, salt = 0, pepper = 0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (out[i] != img[i]) ++changed;
    salt += out[i] == 1.0;
    pepper += out[i] == 0.0;
  }
  EXPECT_EQ(changed, 500);
  EXPECT_EQ(salt, 250);
  EXPECT_EQ(pepper, 250);
}

TEST(SaltPepper, RejectsOutOfRange) {
  EXPECT_THROW(add_salt_pepper(GrayImage(2, 2), 1.5, 0.5, 1), std::invalid_argument);
  EXPECT_THROW(add_salt_pepper(GrayImage(2, 2), 0.5, -0.1, 1), std::invalid_argument);
}

TEST(GaussianKernel, PeakBeforeNormalization) {
  const auto k = gaussian_kernel(1.0, 5, false);
  EXPECT_NEAR(k(2, 2), 1.0 / (2.0 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(k(2, 2), 0.15915, 1e-5);
  EXPECT_NEAR(k(2, 3), std::exp(-0.5) / (2.0 * std::numbers::pi), 1e-15);
}

TEST(GaussianKernel, SumsToOneAndIsSymmetric) {
  for (double sigma : {0.5, 1.0, 2.5}) {
    for (int size : {1, 3, 5, 9}) {
      const auto k = gaussian_kernel(sigma, size);
      double total = 0.0;
      for (double v : k) total += v;
      EXPECT_NEAR(total, 1.0, 1e-12);
      const std::size_t n = static_cast<std::size_t>(size);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          EXPECT_EQ(k(i, j), k(n - 1 - i, n - 1 - j));
          EXPECT_EQ(k(i, j), k(j, i));
        }
      }
    }
  }
}

TEST(GaussianKernel, RejectsBadArguments) {
  EXPECT_THROW(gaussian_kernel(0.0, 3), std::invalid_argument);
  EXPECT_THROW(gaussian_kernel(1.0, 4), std::invalid_argument);
}

TEST(GaussianFilter, ConstantUnchanged) {
  const auto out = gaussian_filter(GrayImage(12, 12, 0.37), 1.3, 5);
  for (double v : out.values()) EXPECT_NEAR(v, 0.37, 1e-15);
}

TEST(GaussianFilter, ImpulseResponseIsKernelCentre) {
  Grid<double> g(11, 11, 0.0);
  g(5, 5) = 1.0;
  const auto out = gaussian_filter(GrayImage(g), 1.0, 5);
  const auto k = gaussian_kernel(1.0, 5);
  EXPECT_NEAR(out(5, 5), k(2, 2), 1e-15);
  EXPECT_NEAR(out(5, 6), k(2, 3), 1e-15);
  EXPECT_NEAR(out(3, 3), k(0, 0), 1e-15);
}

TEST(GaussianFilter, ReducesVariance) {
  const auto noisy = add_gaussian_noise(fixtures::disk_image(), 0.0, 0.1, 42);
  EXPECT_LE(variance(gaussian_filter(noisy, 1.0, 5)), variance(noisy));
}

TEST(MedianFilter, ConstantUnchanged) {
  EXPECT_EQ(median_filter(GrayImage(7, 7, 0.6), 3), GrayImage(7, 7, 0.6));
}

TEST(MedianFilter, RemovesImpulse) {
  Grid<double> g(5, 5, 0.2);
  g(2, 2) = 1.0;
  const auto out = median_filter(GrayImage(g), 3);
  for (double v : out.values()) EXPECT_DOUBLE_EQ(v, 0.2);
}

TEST(MedianFilter, UnitWindowIsIdentity) {
  const auto img = random_gray(6, 8, 13);
  EXPECT_EQ(median_filter(img, 1), img);
}

TEST(MedianFilter, RejectsEvenWindow) { EXPECT_THROW(median_filter(GrayImage(3, 3), 2), std::invalid_argument); }

TEST(Specs, ValidateRanges) {
  NoiseSpec n;
  n.amount = 2.0;
  EXPECT_THROW(n.validate(), std::invalid_argument);
  FilterSpec f;
  f.kind = FilterSpec::Kind::Median;
  f.window = 4;
  EXPECT_THROW(f.validate(), std::invalid_argument);
  f.window = 5;
  EXPECT_NO_THROW(f.validate());
}

TEST(Specs, DispatchMatchesDirectCalls) {
  const auto img = random_gray(10, 10, 6);
  NoiseSpec n;
  n.kind = NoiseSpec::Kind::SaltPepper;
  n.seed = 3;
  EXPECT_EQ(apply_noise(img, n), add_salt_pepper(img, n.amount, n.salt_ratio, 3));
  FilterSpec f;
  f.kind = FilterSpec::Kind::Median;
  EXPECT_EQ(apply_filter(img, f), median_filter(img, f.window));
}
