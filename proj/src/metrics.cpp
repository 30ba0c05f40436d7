#include "r2d2/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "r2d2/errors.hpp"

namespace r2d2 {

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v, StdKind kind) {
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  const double denom = kind == StdKind::sample ? static_cast<double>(v.size()) - 1.0
                                               : static_cast<double>(v.size());
  if (denom <= 0.0) return 0.0;
  return std::sqrt(acc / denom);
}

}  // namespace

std::size_t Mask::count() const noexcept {
  return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), true));
}

Mask circular_mask(std::size_t rows, std::size_t cols, const RoiSpec& roi) {
  if (!(roi.radius >= 1.0)) throw DomainError("ROI radius must be >= 1");
  const double R = static_cast<double>(rows), C = static_cast<double>(cols);
  // bounding box of the lattice disk must be inside [0, rows-1] x [0, cols-1]
  if (roi.row - roi.radius < -0.5 || roi.col - roi.radius < -0.5 ||
      roi.row + roi.radius > R - 0.5 || roi.col + roi.radius > C - 0.5) {
    throw DomainError("ROI disk at (" + std::to_string(roi.row) + ", " + std::to_string(roi.col) +
                      ") radius " + std::to_string(roi.radius) + " crosses the image border");
  }
  Mask m{rows, cols, std::vector<bool>(rows * cols, false)};
  const double r2 = roi.radius * roi.radius;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double dr = static_cast<double>(r) - roi.row;
      const double dc = static_cast<double>(c) - roi.col;
      m.inside[r * cols + c] = dr * dr + dc * dc <= r2;
    }
  }
  if (m.count() == 0) throw DomainError("ROI contains no pixels");
  return m;
}

std::vector<double> roi_values(const Image& x, const RoiSpec& roi) {
  const Mask m = circular_mask(x.rows(), x.cols(), roi);
  std::vector<double> out;
  out.reserve(m.count());
  for (std::size_t i = 0; i < x.size(); ++i)
    if (m.inside[i]) out.push_back(x[i]);
  return out;
}

double snr(const Image& x, const RoiSpec& roi_signal, StdKind std_kind) {
  const auto v = roi_values(x, roi_signal);
  const double s = std_of(v, std_kind);
  if (!(s > 0.0)) throw DegenerateRoiError("signal ROI has zero standard deviation");
  return mean_of(v) / s;
}

double cnr(const Image& x, const RoiSpec& roi_signal, const RoiSpec& roi_background,
           CnrMode mode, StdKind std_kind) {
  const auto vs = roi_values(x, roi_signal);
  const auto vb = roi_values(x, roi_background);
  const double sb = std_of(vb, std_kind);
  if (!(sb > 0.0)) throw DegenerateRoiError("background ROI has zero standard deviation");
  if (mode == CnrMode::mean_difference) return std::abs(mean_of(vs) - mean_of(vb)) / sb;
  if (vs.size() != vb.size()) {
    throw DomainError("paired CNR needs ROIs of equal pixel count (" + std::to_string(vs.size()) +
                      " vs " + std::to_string(vb.size()) + ")");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < vs.size(); ++i) acc += std::abs(vs[i] - vb[i]);
  return acc / static_cast<double>(vs.size()) / sb;
}

}  // namespace r2d2
