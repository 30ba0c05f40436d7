#include "r2d2/consistency.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "fft.hpp"
#include "r2d2/errors.hpp"

namespace r2d2 {

namespace {

std::size_t half_width(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) / 2.0));
}

std::vector<bool> axis_keep(std::size_t n, std::size_t half) {
  std::vector<bool> keep(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    // signed frequency of bin k; |k| and |n - k| are mirrors
    const std::size_t mag = std::min(k, n - k);
    keep[k] = mag <= half;
  }
  return keep;
}

void check_fraction(double f) {
  if (!(f > 0.0 && f <= 1.0)) throw DomainError("omega_fraction must lie in (0, 1]");
}

Image band(const Image& x, const LowFreqMask& mask, bool keep_low) {
  if (x.rows() != mask.rows() || x.cols() != mask.cols()) {
    throw DomainError("low-frequency mask built for " + std::to_string(mask.rows()) + "x" +
                      std::to_string(mask.cols()) + " applied to " + std::to_string(x.rows()) +
                      "x" + std::to_string(x.cols()));
  }
  std::vector<std::complex<double>> grid(x.values().begin(), x.values().end());
  detail::dft2d(grid, x.rows(), x.cols(), false);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c)
      if (mask.contains(r, c) != keep_low) grid[r * x.cols() + c] = 0.0;
  detail::dft2d(grid, x.rows(), x.cols(), true);

  Image out(x.rows(), x.cols());
  double imag_sq = 0.0, real_sq = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = grid[i].real();
    real_sq += grid[i].real() * grid[i].real();
    imag_sq += grid[i].imag() * grid[i].imag();
  }
  // mask symmetry keeps the inverse real up to rounding; anything else is a bug
  const double scale = std::max(std::sqrt(real_sq), norm(x));
  if (std::sqrt(imag_sq) > 1e-8 * scale && imag_sq > 0.0) {
    throw InternalError("low-pass output has a non-negligible imaginary part");
  }
  return out;
}

}  // namespace

LowFreqMask::LowFreqMask(std::size_t rows, std::size_t cols, double fraction)
    : LowFreqMask(rows, cols, fraction, fraction) {}

LowFreqMask::LowFreqMask(std::size_t rows, std::size_t cols, double row_fraction,
                         double col_fraction)
    : rows_(rows), cols_(cols), row_fraction_(row_fraction), col_fraction_(col_fraction) {
  if (rows == 0 || cols == 0) throw DomainError("low-frequency mask needs a non-empty grid");
  check_fraction(row_fraction);
  check_fraction(col_fraction);
  row_half_ = half_width(rows, row_fraction);
  col_half_ = half_width(cols, col_fraction);
  row_keep_ = axis_keep(rows, row_half_);
  col_keep_ = axis_keep(cols, col_half_);
}

std::size_t LowFreqMask::count() const noexcept {
  std::size_t nr = 0, nc = 0;
  for (bool b : row_keep_) nr += b;
  for (bool b : col_keep_) nc += b;
  return nr * nc;
}

Image lowpass(const Image& x, const LowFreqMask& mask) { return band(x, mask, true); }
Image highpass(const Image& x, const LowFreqMask& mask) { return band(x, mask, false); }

Image lowfreq_mix_prepared(const Image& x_cur, const Image& ref_band, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in [0, 1]");
  require_same_shape(x_cur, ref_band, "lowfreq_mix");
  Image out = x_cur;
  out *= 1.0 - lambda;
  out.add_scaled(ref_band, lambda);
  return out;
}

Image lowfreq_mix(const Image& x_cur, const Image& x_ref, double lambda, const LowFreqMask& mask) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in [0, 1]");
  require_same_shape(x_cur, x_ref, "lowfreq_mix");
  return lowfreq_mix_prepared(x_cur, lowpass(x_ref, mask), lambda);
}

SrOperator::SrOperator(int factor) : factor_(factor) {
  if (factor < 1) throw DomainError("SR factor must be >= 1");
}

void SrOperator::check(const Image& x) const {
  const auto d = static_cast<std::size_t>(factor_);
  if (x.rows() % d != 0 || x.cols() % d != 0) {
    throw DomainError("image " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                      " not divisible by SR factor " + std::to_string(factor_));
  }
}

Image SrOperator::downsample(const Image& x) const {
  check(x);
  const auto d = static_cast<std::size_t>(factor_);
  Image low(x.rows() / d, x.cols() / d);
  const double inv = 1.0 / static_cast<double>(d * d);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) low(r / d, c / d) += x(r, c);
  low *= inv;
  return low;
}

Image SrOperator::upsample(const Image& low, std::size_t rows, std::size_t cols) const {
  const auto d = static_cast<std::size_t>(factor_);
  if (low.rows() * d != rows || low.cols() * d != cols) {
    throw DomainError("upsample target shape inconsistent with SR factor");
  }
  Image out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = low(r / d, c / d);
  return out;
}

Image downup_project(const Image& x, const SrOperator& op) {
  if (op.factor() == 1) return x;
  return op.upsample(op.downsample(x), x.rows(), x.cols());
}

Image sr_data_consistency(const Image& x_prime, const Image& x0, const SrOperator& op,
                          bool strict_literal) {
  require_same_shape(x_prime, x0, "sr_data_consistency");
  op.check(x_prime);
  Image out = x_prime - downup_project(x_prime, op);
  out += strict_literal ? x0 : downup_project(x0, op);
  return out;
}

}  // namespace r2d2
