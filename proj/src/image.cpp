#include "r2d2/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "r2d2/errors.hpp"

namespace r2d2 {

Image::Image(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Image::Image(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw DomainError("image value count " + std::to_string(values_.size()) +
                      " does not match shape " + std::to_string(rows) + "x" +
                      std::to_string(cols));
  }
}

Image& Image::operator+=(const Image& rhs) {
  require_same_shape(*this, rhs, "image addition");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += rhs.values_[i];
  return *this;
}

Image& Image::operator-=(const Image& rhs) {
  require_same_shape(*this, rhs, "image subtraction");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= rhs.values_[i];
  return *this;
}

Image& Image::operator*=(double s) noexcept {
  for (double& v : values_) v *= s;
  return *this;
}

Image& Image::add_scaled(const Image& x, double s) {
  require_same_shape(*this, x, "scaled addition");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * x.values_[i];
  return *this;
}

Image operator+(Image lhs, const Image& rhs) { return lhs += rhs; }
Image operator-(Image lhs, const Image& rhs) { return lhs -= rhs; }
Image operator*(Image lhs, double s) { return lhs *= s; }
Image operator*(double s, Image rhs) { return rhs *= s; }

void require_same_shape(const Image& a, const Image& b, std::string_view what) {
  if (!a.same_shape(b)) {
    throw DomainError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) +
                      "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                      "x" + std::to_string(b.cols()));
  }
}

double dot(const Image& a, const Image& b) {
  require_same_shape(a, b, "dot");
  const auto av = a.values();
  const auto bv = b.values();
  return std::inner_product(av.begin(), av.end(), bv.begin(), 0.0);
}

double norm(const Image& a) { return std::sqrt(dot(a, a)); }

double mean(const Image& a) {
  if (a.empty()) return 0.0;
  const auto v = a.values();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double max_abs(const Image& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Image& a, const Image& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double rms_diff(const Image& a, const Image& b) {
  require_same_shape(a, b, "rms_diff");
  if (a.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc / static_cast<double>(a.size()));
}

bool all_finite(const Image& a) noexcept {
  return std::all_of(a.values().begin(), a.values().end(),
                     [](double v) { return std::isfinite(v); });
}

const char* to_string(TransportErrc code) noexcept {
  switch (code) {
    case TransportErrc::connect_failed: return "connect_failed";
    case TransportErrc::handshake_failed: return "handshake_failed";
    case TransportErrc::malformed_frame: return "malformed_frame";
    case TransportErrc::server_error: return "server_error";
    case TransportErrc::shape_mismatch: return "shape_mismatch";
    case TransportErrc::sigma_out_of_range: return "sigma_out_of_range";
    case TransportErrc::io_failed: return "io_failed";
  }
  return "unknown";
}

}  // namespace r2d2
