#pragma once

// Synthetic test images with known ground truth. These generate the files
// under data/ and back the acceptance suite.

#include <cmath>

#include "chanvese/image.hpp"

namespace chanvese::fixtures {

struct DiskGeometry {
  std::size_t rows = 128;
  std::size_t cols = 128;
  double cx = 70.0;
  double cy = 60.0;
  double radius = 36.0;

  bool contains(std::size_t r, std::size_t c) const {
    const double dx = static_cast<double>(c) - cx;
    const double dy = static_cast<double>(r) - cy;
    return dx * dx + dy * dy <= radius * radius;
  }
};

inline BinaryMask disk_truth(const DiskGeometry& geo = {}) {
  BinaryMask mask(geo.rows, geo.cols);
  for (std::size_t r = 0; r < geo.rows; ++r) {
    for (std::size_t c = 0; c < geo.cols; ++c) mask(r, c) = geo.contains(r, c) ? 1 : 0;
  }
  return mask;
}

inline GrayImage disk_image(double inside = 0.9, double outside = 0.1, const DiskGeometry& geo = {}) {
  Grid<double> g(geo.rows, geo.cols, outside);
  for (std::size_t r = 0; r < geo.rows; ++r) {
    for (std::size_t c = 0; c < geo.cols; ++c) {
      if (geo.contains(r, c)) g(r, c) = inside;
    }
  }
  return GrayImage(std::move(g));
}

/// Disk visible in all three channels with different contrasts.
inline RgbImage disk_rgb(const DiskGeometry& geo = {}) {
  return RgbImage(disk_image(0.9, 0.1, geo), disk_image(0.75, 0.2, geo), disk_image(0.65, 0.3, geo));
}

}  // namespace chanvese::fixtures
