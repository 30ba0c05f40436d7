#include <doctest.h>

#include <numeric>

#include "../support/test_support.hpp"
#include "r2d2/errors.hpp"
#include "r2d2/estimation.hpp"

using namespace r2d2;
using namespace r2d2::testing;

namespace {

// trace of the patch covariance computed directly: sum over patch coordinates of the
// population variance of that coordinate
double covariance_trace(const Image& x, int p, int stride) {
  double trace = 0.0;
  for (int dr = 0; dr < p; ++dr) {
    for (int dc = 0; dc < p; ++dc) {
      std::vector<double> v;
      for (std::size_t r = 0; r + p <= x.rows(); r += stride)
        for (std::size_t c = 0; c + p <= x.cols(); c += stride) v.push_back(x(r + dr, c + dc));
      const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
      double acc = 0.0;
      for (double e : v) acc += (e - m) * (e - m);
      trace += acc / v.size();
    }
  }
  return trace;
}

}  // namespace

TEST_CASE("patch covariance spectrum matches a direct trace") {
  const Image x = random_image(20, 17, 3);
  for (int stride : {1, 2, 3}) {
    const auto eig = patch_covariance_eigenvalues(x, 4, stride);
    REQUIRE(eig.size() == 16);
    CHECK(std::is_sorted(eig.begin(), eig.end()));
    CHECK(eig.front() >= 0.0);
    const double sum = std::accumulate(eig.begin(), eig.end(), 0.0);
    CHECK(sum == doctest::Approx(covariance_trace(x, 4, stride)).scale(0.0).epsilon(1e-10));
  }
}

TEST_CASE("constant image has zero estimated noise") {
  const auto est = estimate_noise_std(Image(32, 32, 0.7));
  CHECK(est.sigma_est < 1e-7);
  CHECK(est.n_patches_used == 25u * 25u);
}

TEST_CASE("pure white noise is recovered") {
  for (double sigma : {0.01, 0.1, 1.0}) {
    const Image x = gaussian_image(128, 128, 11, sigma);
    const auto est = estimate_noise_std(x);
    CHECK(est.converged);
    CHECK(est.sigma_est == doctest::Approx(sigma).scale(0.0).epsilon(0.03));
  }
}

TEST_CASE("noise on a piecewise-smooth phantom is recovered") {
  const Image clean = make_phantom(128, 5);
  for (double sigma : {0.02, 0.05, 0.1, 0.2}) {
    const auto est = estimate_noise_std(add_noise(clean, sigma, 17));
    CHECK(est.sigma_est == doctest::Approx(sigma).scale(0.0).epsilon(0.1));
  }
}

TEST_CASE("estimate scales linearly with the image") {
  const Image x = add_noise(make_phantom(64, 2), 0.05, 3);
  const double a = estimate_noise_std(x).sigma_est;
  const double b = estimate_noise_std(x * 3.0).sigma_est;
  CHECK(b == doctest::Approx(3.0 * a).scale(0.0).epsilon(1e-9));
}

TEST_CASE("stride defaults and argument checks") {
  CHECK(default_patch_stride(Image(256, 256)) == 1);
  CHECK(default_patch_stride(Image(257, 256)) == 2);
  const auto est = estimate_noise_std(gaussian_image(300, 300, 1, 0.1));
  CHECK(est.n_patches_used == 147u * 147u);
  CHECK(est.sigma_est == doctest::Approx(0.1).scale(0.0).epsilon(0.03));

  CHECK_THROWS_AS(estimate_noise_std(Image(7, 20)), DomainError);
  CHECK_THROWS_AS(estimate_noise_std(Image(20, 20), 0), DomainError);
  CHECK_THROWS_AS(estimate_noise_std(Image(20, 20), 8, -1), DomainError);
  CHECK_NOTHROW(estimate_noise_std(Image(8, 8), 8));
}
