#include "fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "r2d2/errors.hpp"

namespace r2d2::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

void dft2d(std::vector<std::complex<double>>& grid, std::size_t rows, std::size_t cols,
           bool inverse) {
  if (grid.size() != rows * cols) throw InternalError("dft2d: grid size mismatch");
  auto* data = reinterpret_cast<fftw_complex*>(grid.data());
  fftw_plan plan;
  {
    // FFTW planning is not thread-safe; execution is.
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), data, data,
                            inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw InternalError("fftw planning failed");
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(rows * cols);
    for (auto& v : grid) v *= scale;
  }
}

}  // namespace r2d2::detail
