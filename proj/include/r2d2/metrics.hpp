#pragma once

#include <cstddef>
#include <vector>

#include "r2d2/image.hpp"

namespace r2d2 {

enum class RoiKind { signal, background };

/// Circular region of interest in pixel coordinates.
struct RoiSpec {
  double row = 0.0;
  double col = 0.0;
  double radius = 1.0;
  RoiKind kind = RoiKind::signal;
};

/// Row-major boolean grid.
struct Mask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<bool> inside;

  bool operator()(std::size_t r, std::size_t c) const { return inside[r * cols + c]; }
  std::size_t count() const noexcept;
};

enum class StdKind { population, sample };

/// |mu_s - mu_b| / std_b, or mean(|x_s - x_b|) / std_b over raster-paired pixels.
enum class CnrMode { mean_difference, paired };

/// Pixels with (r - cr)^2 + (c - cc)^2 <= radius^2. The disk's bounding box must lie inside
/// the image.
Mask circular_mask(std::size_t rows, std::size_t cols, const RoiSpec& roi);

/// ROI values in raster order.
std::vector<double> roi_values(const Image& x, const RoiSpec& roi);

double snr(const Image& x, const RoiSpec& roi_signal, StdKind std_kind = StdKind::population);

double cnr(const Image& x, const RoiSpec& roi_signal, const RoiSpec& roi_background,
           CnrMode mode = CnrMode::mean_difference, StdKind std_kind = StdKind::population);

}  // namespace r2d2
