#include "r2d2/estimation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "r2d2/errors.hpp"

namespace r2d2 {

namespace {

void check_patch_args(const Image& x, int patch_size, int stride) {
  if (patch_size < 1) throw DomainError("patch_size must be >= 1");
  if (stride < 1) throw DomainError("patch stride must be >= 1");
  const auto p = static_cast<std::size_t>(patch_size);
  if (x.rows() < p || x.cols() < p) {
    throw DomainError("image " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                      " smaller than one " + std::to_string(patch_size) + "x" +
                      std::to_string(patch_size) + " patch");
  }
}

std::size_t patch_count(std::size_t extent, std::size_t p, std::size_t stride) {
  return (extent - p) / stride + 1;
}

}  // namespace

int default_patch_stride(const Image& x) noexcept {
  return x.rows() * x.cols() > 256u * 256u ? 2 : 1;
}

std::vector<double> patch_covariance_eigenvalues(const Image& x, int patch_size, int stride) {
  check_patch_args(x, patch_size, stride);
  const auto p = static_cast<std::size_t>(patch_size);
  const auto st = static_cast<std::size_t>(stride);
  const std::size_t pr = patch_count(x.rows(), p, st);
  const std::size_t pc = patch_count(x.cols(), p, st);
  const Eigen::Index d = static_cast<Eigen::Index>(p * p);
  const Eigen::Index n = static_cast<Eigen::Index>(pr * pc);

  Eigen::MatrixXd patches(d, n);
  Eigen::Index col = 0;
  for (std::size_t r0 = 0; r0 + p <= x.rows(); r0 += st) {
    for (std::size_t c0 = 0; c0 + p <= x.cols(); c0 += st) {
      Eigen::Index k = 0;
      for (std::size_t dr = 0; dr < p; ++dr)
        for (std::size_t dc = 0; dc < p; ++dc) patches(k++, col) = x(r0 + dr, c0 + dc);
      ++col;
    }
  }
  const Eigen::VectorXd mean_patch = patches.rowwise().mean();
  patches.colwise() -= mean_patch;
  const Eigen::MatrixXd cov = (patches * patches.transpose()) / static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw InternalError("patch covariance eigensolve failed");
  std::vector<double> eig(solver.eigenvalues().data(), solver.eigenvalues().data() + d);
  std::sort(eig.begin(), eig.end());
  for (double& v : eig) v = std::max(v, 0.0);
  return eig;
}

NoiseEstimate estimate_noise_std(const Image& x, int patch_size, int stride) {
  if (stride == 0) stride = default_patch_stride(x);
  check_patch_args(x, patch_size, stride);
  const auto eig = patch_covariance_eigenvalues(x, patch_size, stride);
  const auto p = static_cast<std::size_t>(patch_size);
  const auto st = static_cast<std::size_t>(stride);

  NoiseEstimate out;
  out.n_patches_used = patch_count(x.rows(), p, st) * patch_count(x.cols(), p, st);

  const std::size_t d = eig.size();
  double variance = 0.0;
  std::size_t kept = 0;
  for (std::size_t count = d; count >= 1; --count) {
    double sum = 0.0;
    for (std::size_t k = 0; k < count; ++k) sum += eig[k];
    const double m = sum / static_cast<double>(count);
    std::size_t above = 0, below = 0;
    for (std::size_t k = 0; k < count; ++k) {
      if (eig[k] > m) ++above;
      if (eig[k] < m) ++below;
    }
    if (above == below) {
      variance = m;
      kept = count;
      break;
    }
  }
  if (kept * 4 < d) {
    variance = d % 2 == 1 ? eig[d / 2] : 0.5 * (eig[d / 2 - 1] + eig[d / 2]);
    out.converged = false;
  }
  out.sigma_est = std::sqrt(std::max(variance, 0.0));
  return out;
}

}  // namespace r2d2
