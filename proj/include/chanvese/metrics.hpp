#pragma once

#include <cmath>

#include "chanvese/image.hpp"

namespace chanvese {

inline double mse(const GrayImage& a, const GrayImage& b) {
  require_same_shape(a.grid(), b.grid(), "mse");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

/// Mean over all three channels.
inline double mse(const RgbImage& a, const RgbImage& b) {
  return (mse(a.r(), b.r()) + mse(a.g(), b.g()) + mse(a.b(), b.b())) / 3.0;
}

inline double rmse(const GrayImage& a, const GrayImage& b) { return std::sqrt(mse(a, b)); }
inline double rmse(const RgbImage& a, const RgbImage& b) { return std::sqrt(mse(a, b)); }

namespace detail {

struct Overlap {
  std::size_t a = 0, b = 0, both = 0;
};

inline Overlap overlap(const BinaryMask& a, const BinaryMask& b, const char* context) {
  require_same_shape(a, b, context);
  Overlap o;
  for (std::size_t i = 0; i < a.size(); ++i) {
    o.a += a[i] != 0;
    o.b += b[i] != 0;
    o.both += (a[i] != 0) && (b[i] != 0);
  }
  return o;
}

}  // namespace detail

// Both return 1 for two empty masks and 0 when exactly one is empty.
inline double dice(const BinaryMask& a, const BinaryMask& b) {
  const auto o = detail::overlap(a, b, "dice");
  if (o.a + o.b == 0) return 1.0;
  return 2.0 * static_cast<double>(o.both) / static_cast<double>(o.a + o.b);
}

inline double iou(const BinaryMask& a, const BinaryMask& b) {
  const auto o = detail::overlap(a, b, "iou");
  const std::size_t uni = o.a + o.b - o.both;
  if (uni == 0) return 1.0;
  return static_cast<double>(o.both) / static_cast<double>(uni);
}

}  // namespace chanvese
