#include <doctest.h>

#include <cmath>

#include "../support/test_support.hpp"
#include "r2d2/errors.hpp"
#include "r2d2/random.hpp"
#include "r2d2/score.hpp"

using namespace r2d2;
using namespace r2d2::testing;

TEST_CASE("gaussian_score closed-form cases") {
  const Image m = random_image(4, 5, 1);
  const GaussianPriorScore model(m, 1.0);
  CHECK(max_abs(gaussian_score(model, m, 0.3)) == 0.0);

  // s = 1, sigma = 1, x - m = 2 -> -2 / 2
  const ScoreField s = model.score(m + Image(4, 5, 2.0), 1.0);
  CHECK(max_abs_diff(s, Image(4, 5, -1.0)) < 1e-15);

  const GaussianPriorScore delta = delta_prior(m);
  const Image z = gaussian_image(4, 5, 2);
  const double sigma = 0.7;
  const ScoreField sd = delta.score(m + sigma * z, sigma);
  CHECK(max_abs_diff(sd, (-1.0 / sigma) * z) < 1e-12);

  CHECK_THROWS_AS(model.score(Image(3, 5), 1.0), DomainError);
  CHECK_THROWS_AS(model.score(m, 0.0), DomainError);
  CHECK_THROWS_AS(GaussianPriorScore(m, -1.0), DomainError);
}

TEST_CASE("gmm_score degenerate and symmetric mixtures") {
  const Image m = random_image(3, 3, 3);
  const GaussianPriorScore single(m, 0.4);
  const GmmPriorScore one({{1.0, m, 0.4}});
  const Image x = random_image(3, 3, 4);
  CHECK(max_abs_diff(one.score(x, 0.9), single.score(x, 0.9)) < 1e-15);

  const Image mneg = -1.0 * m;
  const GmmPriorScore sym({{0.5, m, 0.2}, {0.5, mneg, 0.2}});
  CHECK(max_abs(sym.score(Image(3, 3), 0.5)) < 1e-15);

  CHECK_THROWS_AS(GmmPriorScore({}), DomainError);
  CHECK_THROWS_AS(GmmPriorScore({{0.3, m, 0.1}, {0.3, m, 0.1}}), DomainError);
}

TEST_CASE("gmm_score two-component scalar value matches finite differences") {
  const Image plus(1, 1, 1.0), minus(1, 1, -1.0);
  const GmmPriorScore model({{0.5, plus, 0.0}, {0.5, minus, 0.0}});
  const Image x(1, 1, 0.5);
  auto log_density = [&](const Image& y) {
    return std::log(0.5 * std::exp(log_gaussian(y, plus, 1.0)) +
                    0.5 * std::exp(log_gaussian(y, minus, 1.0)));
  };
  const double fd = finite_difference_gradient(log_density, x, 1e-5)[0];
  const double got = model.score(x, 1.0)[0];
  CHECK(got == doctest::Approx(fd).scale(0.0).epsilon(1e-8));
  // closed form tanh(x) - x
  CHECK(got == doctest::Approx(-0.0378828427399902415).scale(0.0).epsilon(1e-14));
}

TEST_CASE("analytic scores agree with finite differences of the log marginal") {
  const double h = 1e-4;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Image m = random_image(2, 3, 100 + seed);
    const double s = 0.1 + 0.2 * static_cast<double>(seed);
    const double sigma = 0.05 + 0.3 * static_cast<double>(seed);
    const Image x = m + gaussian_image(2, 3, 200 + seed, std::sqrt(s * s + sigma * sigma));

    const GaussianPriorScore g(m, s);
    const Image fd = finite_difference_gradient(
        [&](const Image& y) { return log_gaussian(y, m, s * s + sigma * sigma); }, x, h);
    const ScoreField got = g.score(x, sigma);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(std::abs(got[i] - fd[i]) <= 1e-4 * std::max(std::abs(fd[i]), 1e-3));
    }

    const Image m2 = random_image(2, 3, 300 + seed, -1.0, 0.0);
    const GmmPriorScore gm({{0.3, m, s}, {0.7, m2, 0.5 * s}});
    auto logp = [&](const Image& y) {
      const double a = std::log(0.3) + log_gaussian(y, m, s * s + sigma * sigma);
      const double b = std::log(0.7) + log_gaussian(y, m2, 0.25 * s * s + sigma * sigma);
      const double top = std::max(a, b);
      return top + std::log(std::exp(a - top) + std::exp(b - top));
    };
    const Image fd2 = finite_difference_gradient(logp, x, h);
    const ScoreField got2 = gm.score(x, sigma);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(std::abs(got2[i] - fd2[i]) <= 1e-4 * std::max(std::abs(fd2[i]), 1e-3));
    }
  }
}

TEST_CASE("gmm responsibilities stay finite far from every component") {
  const Image a(8, 8, 0.0), b(8, 8, 1.0);
  const GmmPriorScore model({{0.5, a, 0.0}, {0.5, b, 0.0}});
  const Image x(8, 8, 50.0);
  const auto r = model.responsibilities(x, 0.01);
  CHECK(r[1] == doctest::Approx(1.0));
  CHECK(all_finite(model.score(x, 0.01)));
}

TEST_CASE("dsm_loss reference cases") {
  const NoiseSchedule sched;
  const Image x0 = random_image(6, 6, 5);
  const Image z = gaussian_image(6, 6, 6);
  const GaussianPriorScore exact = delta_prior(x0);
  for (double t : {sched.epsilon(), 0.1, 0.5, 1.0}) {
    CHECK(dsm_loss(exact, sched, x0, t, z) == doctest::Approx(0.0).epsilon(1e-20));
    CHECK(dsm_loss(ZeroScore{}, sched, x0, t, z) ==
          doctest::Approx(dot(z, z) / 36.0).scale(0.0).epsilon(1e-12));
    const double sigma = sched.sigma_continuous(t);
    const double delta = 0.25;
    // sigma^2 * delta^2 up to the rounding in the cancelling exact term
    CHECK(dsm_loss(OffsetScore(exact, delta), sched, x0, t, z) ==
          doctest::Approx(sigma * sigma * delta * delta).scale(0.0).epsilon(1e-6));
  }
  CHECK_THROWS_AS(dsm_loss(exact, sched, x0, 0.0, z), DomainError);
  CHECK_THROWS_AS(dsm_loss(exact, sched, x0, 0.5, Image(2, 2)), DomainError);
}

TEST_CASE("dsm_loss is minimized by the exact score on average") {
  const NoiseSchedule sched;
  const Image x0 = random_image(4, 4, 9);
  const GaussianPriorScore exact = delta_prior(x0);
  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> ut(sched.epsilon(), 1.0);
  for (double delta : {-0.5, -1e-3, 1e-3, 0.5}) {
    const OffsetScore off(exact, delta);
    double le = 0.0, lo = 0.0;
    for (int k = 0; k < 500; ++k) {
      const double t = ut(gen);
      const Image z = gaussian_image(4, 4, 1000 + k);
      le += dsm_loss(exact, sched, x0, t, z);
      lo += dsm_loss(off, sched, x0, t, z);
    }
    CHECK(le < lo);
  }
}
