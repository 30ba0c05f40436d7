#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace r2d2 {

/// Real-valued single-channel 2-D grid, row-major.
///
/// Intensities are expected on the [0, 1] scale when entering the pipeline; noise
/// levels are interpreted on that same scale.
class Image {
 public:
  Image() = default;
  Image(std::size_t rows, std::size_t cols, double fill = 0.0);
  Image(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool same_shape(const Image& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  Image& operator+=(const Image& rhs);
  Image& operator-=(const Image& rhs);
  Image& operator*=(double s) noexcept;

  /// this += s * x
  Image& add_scaled(const Image& x, double s);

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

Image operator+(Image lhs, const Image& rhs);
Image operator-(Image lhs, const Image& rhs);
Image operator*(Image lhs, double s);
Image operator*(double s, Image rhs);

/// Throws DomainError naming `what` when shapes differ.
void require_same_shape(const Image& a, const Image& b, std::string_view what);

double dot(const Image& a, const Image& b);
double norm(const Image& a);
double mean(const Image& a);
double max_abs(const Image& a);
double max_abs_diff(const Image& a, const Image& b);
double rms_diff(const Image& a, const Image& b);
bool all_finite(const Image& a) noexcept;

}  // namespace r2d2
