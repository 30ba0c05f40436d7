#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace r2d2::detail {

/// In-place unnormalized 2-D DFT of a row-major complex grid; `inverse` applies the
/// conjugate transform and divides by rows * cols.
void dft2d(std::vector<std::complex<double>>& grid, std::size_t rows, std::size_t cols,
           bool inverse);

}  // namespace r2d2::detail
