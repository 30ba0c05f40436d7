#pragma once

#include <cstddef>
#include <vector>

#include "r2d2/image.hpp"

namespace r2d2 {

struct NoiseEstimate {
  double sigma_est = 0.0;
  std::size_t n_patches_used = 0;
  /// False when the eigenvalue split left too few components and the median fallback
  /// was used instead.
  bool converged = true;
};

inline constexpr int kDefaultPatchSize = 8;

/// Stride used when the caller passes 0: 2 above 256x256 pixels, 1 otherwise.
int default_patch_stride(const Image& x) noexcept;

/// Eigenvalues (ascending, clamped at 0) of the sample covariance of all
/// patch_size x patch_size patches taken at `stride`, centered by the mean patch.
std::vector<double> patch_covariance_eigenvalues(const Image& x, int patch_size, int stride);

/// Blind Gaussian noise std from a single image.
///
/// The patch covariance spectrum is split into a noise subspace of the r smallest
/// eigenvalues, with r the largest count whose mean has as many of those eigenvalues
/// above it as below it (mean equals median). The noise variance is that mean. If r
/// falls under d/4 the median eigenvalue is used instead.
NoiseEstimate estimate_noise_std(const Image& x, int patch_size = kDefaultPatchSize,
                                 int stride = 0);

}  // namespace r2d2
