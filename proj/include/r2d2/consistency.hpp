#pragma once

#include <cstddef>
#include <vector>

#include "r2d2/image.hpp"

namespace r2d2 {

/// Centered low-frequency index set Omega for a fixed grid shape.
///
/// Along an axis of length n the signed frequencies k with |k| <= floor(f n / 2) are kept,
/// f being the per-axis fraction. The set is closed under negation, always contains DC, and
/// contains the Nyquist bin of an even axis only when the whole axis is kept.
class LowFreqMask {
 public:
  static constexpr double kDefaultFraction = 0.125;

  LowFreqMask(std::size_t rows, std::size_t cols, double fraction = kDefaultFraction);
  LowFreqMask(std::size_t rows, std::size_t cols, double row_fraction, double col_fraction);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double row_fraction() const noexcept { return row_fraction_; }
  double col_fraction() const noexcept { return col_fraction_; }
  std::size_t row_half_width() const noexcept { return row_half_; }
  std::size_t col_half_width() const noexcept { return col_half_; }

  /// Membership by DFT bin index (0..rows-1, 0..cols-1).
  bool contains(std::size_t kr, std::size_t kc) const noexcept {
    return row_keep_[kr] && col_keep_[kc];
  }
  std::size_t count() const noexcept;

 private:
  std::size_t rows_, cols_;
  double row_fraction_, col_fraction_;
  std::size_t row_half_, col_half_;
  std::vector<bool> row_keep_, col_keep_;
};

/// F^-1 P_Omega F x.
Image lowpass(const Image& x, const LowFreqMask& mask);
/// F^-1 (I - P_Omega) F x.
Image highpass(const Image& x, const LowFreqMask& mask);

/// lambda * lowpass(x_ref) + (1 - lambda) * x_cur. Lipschitz in x_cur with factor 1 - lambda.
Image lowfreq_mix(const Image& x_cur, const Image& x_ref, double lambda, const LowFreqMask& mask);
/// Same map with the reference band already computed (lowpass(x_ref)).
Image lowfreq_mix_prepared(const Image& x_cur, const Image& ref_band, double lambda);

/// Block-average downsampling by `factor` followed by replication upsampling. The
/// composite is the orthogonal projection onto images constant on factor x factor blocks.
class SrOperator {
 public:
  explicit SrOperator(int factor);

  int factor() const noexcept { return factor_; }
  /// Throws DomainError unless both dimensions are divisible by factor.
  void check(const Image& x) const;

  Image downsample(const Image& x) const;
  Image upsample(const Image& low, std::size_t rows, std::size_t cols) const;

 private:
  int factor_;
};

Image downup_project(const Image& x, const SrOperator& op);

/// (I - P) x_prime + P x0, or (I - P) x_prime + x0 when `strict_literal` is set.
Image sr_data_consistency(const Image& x_prime, const Image& x0, const SrOperator& op,
                          bool strict_literal = false);

}  // namespace r2d2
