#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "r2d2/image.hpp"

namespace r2d2 {

/// Philox4x32-10 counter-based bijection (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// splitmix64 finalizer; used to derive independent child seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Child seed for ensemble member / sweep entry `k`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) noexcept;

/// Sampling phase, part of every noise stream address.
enum class Phase : std::uint32_t {
  generate = 0,
  denoise = 1,
  sr_init = 2,
  sr = 3,
  user = 4,
};

/// Address of one stream of standard normals: (phase, step index, substep index).
/// Substep 0 feeds the predictor, substeps 1..k the corrector.
struct StreamId {
  Phase phase = Phase::user;
  std::uint32_t step = 0;
  std::uint32_t substep = 0;
};

/// Deterministic source of standard-normal images.
///
/// Every (seed, stream id, pixel) triple maps to a fixed value, so two trajectories
/// built from the same seed see identical noise at every step regardless of the
/// order in which steps are evaluated.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  Image normal(std::size_t rows, std::size_t cols, StreamId id) const;
  Image normal_like(const Image& shape, StreamId id) const {
    return normal(shape.rows(), shape.cols(), id);
  }

 private:
  std::uint64_t seed_;
};

}  // namespace r2d2
