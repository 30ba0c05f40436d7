#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../support/test_support.hpp"
#include "r2d2/consistency.hpp"
#include "r2d2/errors.hpp"

using namespace r2d2;
using namespace r2d2::testing;

TEST_CASE("mask keeps |k| <= floor(f n / 2) per axis") {
  const LowFreqMask m(64, 64);
  CHECK(m.row_half_width() == 4);
  CHECK(m.col_half_width() == 4);
  CHECK(m.count() == 81);
  CHECK(m.contains(0, 0));
  CHECK(m.contains(4, 60));
  CHECK_FALSE(m.contains(5, 0));
  CHECK_FALSE(m.contains(0, 59));

  const LowFreqMask odd(9, 6, 0.5, 1.0);
  CHECK(odd.row_half_width() == 2);
  CHECK(odd.count() == 5 * 6);  // whole column axis, Nyquist included
  CHECK(odd.contains(0, 3));

  const LowFreqMask tiny(4, 4, 0.1);
  CHECK(tiny.count() == 1);  // DC only

  for (std::size_t kr = 0; kr < 64; ++kr)
    for (std::size_t kc = 0; kc < 64; ++kc)
      CHECK(m.contains(kr, kc) == m.contains((64 - kr) % 64, (64 - kc) % 64));

  CHECK_THROWS_AS(LowFreqMask(8, 8, 0.0), DomainError);
  CHECK_THROWS_AS(LowFreqMask(8, 8, 1.5), DomainError);
  CHECK_THROWS_AS(LowFreqMask(0, 8), DomainError);
}

TEST_CASE("FFT low-pass matches the direct DFT") {
  for (auto [r, c, f] : {std::tuple{16, 16, 0.125}, {12, 10, 0.3}, {9, 7, 0.5}, {8, 8, 1.0}}) {
    const Image x = random_image(r, c, static_cast<std::uint64_t>(r * c));
    const LowFreqMask mask(r, c, f);
    CHECK(max_abs_diff(lowpass(x, mask), brute_force_lowpass(x, mask)) < 1e-12);
  }
}

TEST_CASE("low-pass is an orthogonal projection") {
  const Image x = random_image(32, 24, 1);
  const LowFreqMask mask(32, 24);
  const Image lo = lowpass(x, mask);
  const Image hi = highpass(x, mask);
  CHECK(max_abs_diff(lo + hi, x) < 1e-13);
  CHECK(max_abs_diff(lowpass(lo, mask), lo) < 1e-13);
  CHECK(std::abs(dot(lo, hi)) < 1e-10);
  CHECK(mean(lo) == doctest::Approx(mean(x)).scale(0.0).epsilon(1e-13));
  CHECK(max_abs_diff(lowpass(x, LowFreqMask(32, 24, 1.0)), x) < 1e-13);
  CHECK_THROWS_AS(lowpass(x, LowFreqMask(8, 8)), DomainError);
}

TEST_CASE("single sinusoids pass or vanish exactly") {
  const std::size_t n = 32;
  auto wave = [&](int k) {
    Image x(n, n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c)
        x(r, c) = std::cos(2.0 * std::numbers::pi * k * static_cast<double>(c) / n);
    return x;
  };
  const LowFreqMask mask(n, n);  // half width 2
  CHECK(max_abs_diff(lowpass(wave(2), mask), wave(2)) < 1e-13);
  CHECK(max_abs(lowpass(wave(3), mask)) < 1e-13);
}

TEST_CASE("low-frequency mix formula and contraction") {
  const Image a = random_image(16, 16, 1), b = random_image(16, 16, 2), ref = random_image(16, 16, 3);
  const LowFreqMask mask(16, 16);
  const double lambda = 0.3;
  const Image mixed = lowfreq_mix(a, ref, lambda, mask);
  CHECK(max_abs_diff(mixed, lambda * lowpass(ref, mask) + (1.0 - lambda) * a) < 1e-14);
  CHECK(max_abs_diff(mixed, lowfreq_mix_prepared(a, lowpass(ref, mask), lambda)) == 0.0);
  const double ratio = norm(lowfreq_mix(a, ref, lambda, mask) - lowfreq_mix(b, ref, lambda, mask)) /
                       norm(a - b);
  CHECK(ratio == doctest::Approx(1.0 - lambda).scale(0.0).epsilon(1e-12));
  CHECK(lowfreq_mix(a, ref, 0.0, mask) == a);
  CHECK_THROWS_AS(lowfreq_mix(a, ref, 1.1, mask), DomainError);
  CHECK_THROWS_AS(lowfreq_mix(a, ref, -0.1, mask), DomainError);
}

TEST_CASE("block average and replication") {
  const SrOperator op(2);
  const Image x(2, 4, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8});
  const Image low = op.downsample(x);
  CHECK(low == Image(1, 2, std::vector<double>{3.5, 5.5}));
  CHECK(op.upsample(low, 2, 4) == Image(2, 4, std::vector<double>{3.5, 3.5, 5.5, 5.5, 3.5, 3.5, 5.5, 5.5}));
  CHECK_THROWS_AS(op.check(Image(3, 4)), DomainError);
  CHECK_THROWS_AS(op.upsample(low, 4, 4), DomainError);
  CHECK_THROWS_AS(SrOperator(0), DomainError);
}

TEST_CASE("down-up map is an orthogonal projection") {
  for (int factor : {1, 2, 4}) {
    const SrOperator op(factor);
    const Image x = random_image(16, 8, 4), y = random_image(16, 8, 5);
    const Image px = downup_project(x, op);
    CHECK(max_abs_diff(downup_project(px, op), px) < 1e-14);
    // self-adjoint
    CHECK(dot(px, y) == doctest::Approx(dot(x, downup_project(y, op))).scale(0.0).epsilon(1e-12));
    if (factor == 1) CHECK(px == x);
  }
}

TEST_CASE("SR data consistency restores the block averages of x0") {
  const SrOperator op(2);
  const Image x0 = random_image(8, 8, 1), xp = random_image(8, 8, 2);
  const Image dc = sr_data_consistency(xp, x0, op);
  CHECK(max_abs_diff(op.downsample(dc), op.downsample(x0)) < 1e-14);
  CHECK(max_abs_diff(dc - downup_project(dc, op), xp - downup_project(xp, op)) < 1e-14);
  CHECK(max_abs_diff(sr_data_consistency(xp, x0, op, true), xp - downup_project(xp, op) + x0) < 1e-15);
  // x0 is a fixed point
  CHECK(max_abs_diff(sr_data_consistency(x0, x0, op), x0) < 1e-14);
}
