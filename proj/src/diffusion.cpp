#include "r2d2/diffusion.hpp"

#include <cmath>
#include <string>

#include "r2d2/errors.hpp"

namespace r2d2 {

void SamplerSettings::validate() const {
  if (corrector_steps < 0) throw DomainError("corrector_steps must be >= 0");
  if (!(corrector_snr > 0.0) || !std::isfinite(corrector_snr)) {
    throw DomainError("corrector_snr must be > 0");
  }
}

Image perturb(const Image& x0, const NoiseSchedule& schedule, double t, const Image& z) {
  if (!(t >= schedule.epsilon() && t <= 1.0)) throw DomainError("perturb requires t in [epsilon, 1]");
  require_same_shape(x0, z, "perturb");
  Image out = x0;
  out.add_scaled(z, schedule.sigma_continuous(t));
  return out;
}

Image em_predictor_step(const Image& x_next, double sigma_from, double sigma_to, const Image& z,
                        const ScoreModel& model) {
  require_same_shape(x_next, z, "em_predictor_step");
  const double dvar = sigma_from * sigma_from - sigma_to * sigma_to;
  if (dvar < 0.0 || sigma_to < 0.0) {
    throw InternalError("reverse step must not increase the noise level (" +
                        std::to_string(sigma_from) + " -> " + std::to_string(sigma_to) + ")");
  }
  if (dvar == 0.0) return x_next;
  const ScoreField s = model.score(x_next, sigma_from);
  require_same_shape(s, x_next, "score output");
  Image out = x_next;
  out.add_scaled(s, dvar);
  out.add_scaled(z, std::sqrt(dvar));
  return out;
}

Image em_predictor_step(const Image& x_next, int i, const Image& z, const ScoreModel& model,
                        const NoiseSchedule& schedule) {
  if (i < 0 || i > schedule.n_steps() - 1) {
    throw DomainError("predictor index " + std::to_string(i) + " outside [0, N-1]");
  }
  return em_predictor_step(x_next, schedule.level(i + 1), schedule.level(i), z, model);
}

Image langevin_corrector_step(const Image& x, double sigma, const Image& z,
                              const ScoreModel& model, double snr) {
  require_same_shape(x, z, "langevin_corrector_step");
  const ScoreField s = model.score(x, sigma);
  require_same_shape(s, x, "score output");
  const double s_norm = norm(s);
  if (s_norm == 0.0) return x;
  const double ratio = snr * norm(z) / s_norm;
  const double eta = 2.0 * ratio * ratio;
  Image out = x;
  out.add_scaled(s, eta);
  out.add_scaled(z, std::sqrt(2.0 * eta));
  return out;
}

Image langevin_corrector_step(const Image& x, int i, const Image& z, const ScoreModel& model,
                              const NoiseSchedule& schedule, const SamplerSettings& settings) {
  if (i < 1 || i > schedule.n_steps()) {
    throw DomainError("corrector index " + std::to_string(i) + " outside [1, N]");
  }
  return langevin_corrector_step(x, schedule.sigma_at(i), z, model, settings.corrector_snr);
}

Image pc_step(const Image& x, int i, const ScoreModel& model, const SamplerSettings& settings,
              const NoiseSchedule& schedule, const NoiseSource& rng, Phase phase,
              bool use_corrector) {
  const auto step = static_cast<std::uint32_t>(i);
  Image out = em_predictor_step(x, i, rng.normal_like(x, {phase, step, 0}), model, schedule);
  if (!use_corrector || i == 0) return out;
  for (int k = 1; k <= settings.corrector_steps; ++k) {
    out = langevin_corrector_step(out, i, rng.normal_like(x, {phase, step, static_cast<std::uint32_t>(k)}),
                                  model, schedule, settings);
  }
  return out;
}

Image generate(std::size_t rows, std::size_t cols, const ScoreModel& model,
               const NoiseSchedule& schedule, const SamplerSettings& settings,
               const NoiseSource& rng) {
  settings.validate();
  const auto n = static_cast<std::uint32_t>(schedule.n_steps());
  Image x = rng.normal(rows, cols, {Phase::generate, n, 0});
  x *= schedule.sigma_max();
  for (int i = schedule.n_steps() - 1; i >= 0; --i) {
    x = pc_step(x, i, model, settings, schedule, rng, Phase::generate);
  }
  return x;
}

}  // namespace r2d2
