#include <doctest.h>

#include <cmath>

#include "../support/test_support.hpp"
#include "r2d2/diffusion.hpp"
#include "r2d2/errors.hpp"

using namespace r2d2;
using namespace r2d2::testing;

TEST_CASE("perturb adds sigma(t) z") {
  const NoiseSchedule sched;
  const Image x0(2, 2, 1.0);
  const Image z(2, 2, std::vector<double>{1.0, -1.0, 0.5, 0.0});
  const Image xt = perturb(x0, sched, 1.0, z);
  CHECK(xt == Image(2, 2, std::vector<double>{379.0, -377.0, 190.0, 1.0}));
  CHECK_THROWS_AS(perturb(x0, sched, 0.0, z), DomainError);
  CHECK_THROWS_AS(perturb(x0, sched, 1.5, z), DomainError);
}

TEST_CASE("predictor step reproduces the hand-computed update") {
  // constant score s = 0.5 everywhere, sigma 2 -> 1: dvar = 3
  const ZeroScore zero;
  const OffsetScore half(zero, 0.5);
  const Image x(1, 3, std::vector<double>{0.0, 1.0, 2.0});
  const Image z(1, 3, std::vector<double>{1.0, 0.0, -2.0});
  const Image out = em_predictor_step(x, 2.0, 1.0, z, half);
  const double r3 = std::sqrt(3.0);
  CHECK(out[0] == doctest::Approx(1.5 + r3).scale(0.0).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(2.5).scale(0.0).epsilon(1e-15));
  CHECK(out[2] == doctest::Approx(3.5 - 2.0 * r3).scale(0.0).epsilon(1e-15));

  CHECK(em_predictor_step(x, 1.0, 1.0, z, half) == x);
  CHECK_THROWS_AS(em_predictor_step(x, 1.0, 2.0, z, half), InternalError);
  CHECK_THROWS_AS(em_predictor_step(x, 1.0, 1.0, Image(2, 2), half), DomainError);
}

TEST_CASE("indexed predictor walks the schedule and ends at the terminal level") {
  const NoiseSchedule sched(0.01, 378.0, 10);
  const Image x0 = random_image(4, 4, 2);
  const GaussianPriorScore delta = delta_prior(x0);
  const Image x = random_image(4, 4, 3);
  const Image z = gaussian_image(4, 4, 4);
  // delta prior: x + s1^2 * (-(x - x0)/s1^2) + s1 z = x0 + s1 z
  const Image last = em_predictor_step(x, 0, z, delta, sched);
  const double s1 = sched.sigma_at(1);
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(last[k] == doctest::Approx(x0[k] + s1 * z[k]).scale(0.0).epsilon(1e-12));

  const Image mid = em_predictor_step(x, 4, z, delta, sched);
  const Image ref = em_predictor_step(x, sched.sigma_at(5), sched.sigma_at(4), z, delta);
  CHECK(mid == ref);
  CHECK_THROWS_AS(em_predictor_step(x, -1, z, delta, sched), DomainError);
  CHECK_THROWS_AS(em_predictor_step(x, 10, z, delta, sched), DomainError);
}

TEST_CASE("corrector uses the signal-to-noise step size") {
  const ZeroScore zero;
  const OffsetScore s(zero, -0.25);  // ||s|| = 0.25 * 2 over 4 pixels
  const Image x(2, 2, 1.0);
  const Image z(2, 2, std::vector<double>{1.0, 1.0, 1.0, 1.0});  // ||z|| = 2
  const double snr = 0.16;
  const double eta = 2.0 * std::pow(snr * 2.0 / 0.5, 2);
  const Image out = langevin_corrector_step(x, 1.0, z, s, snr);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(out[k] == doctest::Approx(1.0 - 0.25 * eta + std::sqrt(2.0 * eta)).scale(0.0).epsilon(1e-14));
  }
  CHECK(langevin_corrector_step(x, 1.0, z, zero, snr) == x);

  const NoiseSchedule sched(0.01, 378.0, 10);
  SamplerSettings settings;
  CHECK_THROWS_AS(langevin_corrector_step(x, 0, z, s, sched, settings), DomainError);
  CHECK_THROWS_AS(langevin_corrector_step(x, 11, z, s, sched, settings), DomainError);
}

TEST_CASE("pc_step is the predictor followed by the corrector on addressed streams") {
  const NoiseSchedule sched(0.01, 378.0, 50);
  const GaussianPriorScore prior(Image(8, 8, 0.3), 0.2);
  const NoiseSource rng(99);
  SamplerSettings settings;
  settings.corrector_steps = 2;
  const Image x = gaussian_image(8, 8, 5, 3.0);
  const int i = 17;

  Image expect = em_predictor_step(x, i, rng.normal(8, 8, {Phase::sr, 17, 0}), prior, sched);
  expect = langevin_corrector_step(expect, sched.sigma_at(i), rng.normal(8, 8, {Phase::sr, 17, 1}),
                                   prior, settings.corrector_snr);
  expect = langevin_corrector_step(expect, sched.sigma_at(i), rng.normal(8, 8, {Phase::sr, 17, 2}),
                                   prior, settings.corrector_snr);
  CHECK(pc_step(x, i, prior, settings, sched, rng, Phase::sr) == expect);

  const Image pred = em_predictor_step(x, i, rng.normal(8, 8, {Phase::sr, 17, 0}), prior, sched);
  CHECK(pc_step(x, i, prior, settings, sched, rng, Phase::sr, false) == pred);

  // terminal step: corrector skipped
  const Image p0 = em_predictor_step(x, 0, rng.normal(8, 8, {Phase::sr, 0, 0}), prior, sched);
  CHECK(pc_step(x, 0, prior, settings, sched, rng, Phase::sr) == p0);
}

namespace {

// Exact variance of each pixel after the reverse EM chain with a Gaussian prior
// N(m, v0): x_i = x_{i+1} - d (x_{i+1} - m)/(v0 + s_{i+1}^2) + sqrt(d) z.
double em_chain_variance(const NoiseSchedule& sched, double v0) {
  double v = sched.sigma_max() * sched.sigma_max();
  for (int i = sched.n_steps() - 1; i >= 0; --i) {
    const double a = sched.level(i + 1), b = sched.level(i);
    const double d = a * a - b * b;
    const double shrink = 1.0 - d / (v0 + a * a);
    v = shrink * shrink * v + d;
  }
  return v;
}

double sample_std(const Image& x) {
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x.values()) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(x.size()));
}

}  // namespace

TEST_CASE("generation from a Gaussian prior reproduces the chain's exact statistics") {
  const NoiseSchedule sched;
  const double prior_std = 0.1;
  const GaussianPriorScore prior(Image(64, 64, 0.4), prior_std);
  SamplerSettings settings;
  settings.corrector_steps = 0;
  const Image x = generate(64, 64, prior, sched, settings, NoiseSource(7));
  const double expect_std = std::sqrt(em_chain_variance(sched, prior_std * prior_std));
  // the exact chain variance is within a few percent of the prior's
  CHECK(expect_std == doctest::Approx(prior_std).scale(0.0).epsilon(0.05));
  // 4096 samples: std of the sample std ~ 1.1 %
  CHECK(sample_std(x) == doctest::Approx(expect_std).scale(0.0).epsilon(0.06));
  CHECK(mean(x) == doctest::Approx(0.4).scale(0.0).epsilon(0.02));

  settings.corrector_steps = 1;
  const Image xc = generate(64, 64, prior, sched, settings, NoiseSource(7));
  CHECK(all_finite(xc));
  CHECK(sample_std(xc) == doctest::Approx(prior_std).scale(0.0).epsilon(0.15));
  CHECK(mean(xc) == doctest::Approx(0.4).scale(0.0).epsilon(0.02));
}

TEST_CASE("generation is deterministic in the seed") {
  const NoiseSchedule sched(0.01, 378.0, 100);
  const GaussianPriorScore prior(Image(8, 8, 0.0), 1.0);
  SamplerSettings settings;
  const Image a = generate(8, 8, prior, sched, settings, NoiseSource(1));
  const Image b = generate(8, 8, prior, sched, settings, NoiseSource(1));
  const Image c = generate(8, 8, prior, sched, settings, NoiseSource(2));
  CHECK(a == b);
  CHECK_FALSE(a == c);
}

TEST_CASE("sampler settings validation") {
  SamplerSettings s;
  CHECK_NOTHROW(s.validate());
  s.corrector_steps = -1;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s.corrector_steps = 1;
  s.corrector_snr = 0.0;
  CHECK_THROWS_AS(s.validate(), DomainError);
}
