#pragma once

#include <cstddef>

#include "r2d2/image.hpp"
#include "r2d2/random.hpp"
#include "r2d2/schedule.hpp"
#include "r2d2/score.hpp"

namespace r2d2 {

/// Predictor-corrector knobs. The corrector is annealed Langevin dynamics with the
/// signal-to-noise step rule eta = 2 (r ||z|| / ||s||)^2.
struct SamplerSettings {
  int corrector_steps = 1;
  double corrector_snr = 0.16;

  void validate() const;
};

/// x0 + sigma(t) z
Image perturb(const Image& x0, const NoiseSchedule& schedule, double t, const Image& z);

/// One reverse-time Euler-Maruyama step of the VE-SDE from level sigma_from down to
/// sigma_to:
///   x + (sigma_from^2 - sigma_to^2) s(x, sigma_from) + sqrt(sigma_from^2 - sigma_to^2) z
/// Throws InternalError when sigma_to > sigma_from.
Image em_predictor_step(const Image& x_next, double sigma_from, double sigma_to, const Image& z,
                        const ScoreModel& model);

/// Indexed form: x_next sits at schedule index i + 1, the result at index i
/// (0 <= i <= N - 1; index 0 is the noise-free terminal level).
Image em_predictor_step(const Image& x_next, int i, const Image& z, const ScoreModel& model,
                        const NoiseSchedule& schedule);

/// x + eta s(x, sigma) + sqrt(2 eta) z with eta = 2 (snr ||z|| / ||s||)^2; identity when
/// the score vanishes.
Image langevin_corrector_step(const Image& x, double sigma, const Image& z,
                              const ScoreModel& model, double snr);

Image langevin_corrector_step(const Image& x, int i, const Image& z, const ScoreModel& model,
                              const NoiseSchedule& schedule, const SamplerSettings& settings);

/// Predictor from index i + 1 to i followed by `corrector_steps` corrector steps at
/// level i. Noise for substep k comes from stream (phase, i, k). The corrector is
/// skipped at i = 0 where the score is undefined, and when `use_corrector` is false.
Image pc_step(const Image& x, int i, const ScoreModel& model, const SamplerSettings& settings,
              const NoiseSchedule& schedule, const NoiseSource& rng, Phase phase,
              bool use_corrector = true);

/// Unconditional sampling: x_N = sigma_max z, then pc_step for i = N-1 .. 0.
Image generate(std::size_t rows, std::size_t cols, const ScoreModel& model,
               const NoiseSchedule& schedule, const SamplerSettings& settings,
               const NoiseSource& rng);

}  // namespace r2d2
