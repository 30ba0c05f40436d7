#include "r2d2/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "r2d2/errors.hpp"

namespace r2d2 {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError("alpha must lie in (0, 1], got " + std::to_string(alpha));
  }
}

int steps_for(double alpha, double t_prime, int n_steps) {
  const long n = std::lround(alpha * t_prime * static_cast<double>(n_steps));
  return static_cast<int>(std::clamp<long>(n, 0, n_steps));
}

}  // namespace

void DenoiseConfig::validate() const {
  check_alpha(alpha);
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in [0, 1]");
  if (!(omega_fraction > 0.0 && omega_fraction <= 1.0)) {
    throw DomainError("omega_fraction must lie in (0, 1]");
  }
  if (sr_factor < 1) throw DomainError("sr_factor must be >= 1");
  if (sr_steps < 0) throw DomainError("sr_steps must be >= 0");
  if (sr_steps > schedule.n_steps()) throw DomainError("sr_steps must not exceed n_steps");
  if (sigma_override && !(*sigma_override > 0.0)) {
    throw DomainError("sigma override must be positive");
  }
  if (patch_size < 1) throw DomainError("patch_size must be >= 1");
  sampler.validate();
}

NoiseEstimator default_estimator(const DenoiseConfig& cfg) {
  const int patch = cfg.patch_size;
  return [patch](const Image& x) { return estimate_noise_std(x, patch, 0); };
}

StepPlan replan(const StepPlan& base, const DenoiseConfig& cfg, double alpha) {
  check_alpha(alpha);
  StepPlan plan = base;
  const auto& sched = cfg.schedule;
  if (!(plan.sigma_est > sched.sigma_min())) {
    // no in-range diffusion time: identity
    plan.t_prime = sched.epsilon();
    plan.clamp = InverseTime::Clamp::low;
    plan.n_prime = 0;
    return plan;
  }
  const InverseTime inv = sched.sigma_inverse(plan.sigma_est);
  plan.t_prime = inv.t;
  plan.clamp = inv.clamp;
  plan.n_prime = steps_for(alpha, inv.t, sched.n_steps());
  return plan;
}

StepPlan plan_steps(const Image& x_noisy, const DenoiseConfig& cfg,
                    const NoiseEstimator& estimator) {
  StepPlan plan;
  if (cfg.sigma_override) {
    plan.sigma_est = *cfg.sigma_override;
    plan.from_override = true;
  } else {
    plan.estimate = estimator(x_noisy);
    plan.sigma_est = plan.estimate->sigma_est;
  }
  return replan(plan, cfg, cfg.alpha);
}

StepPlan plan_steps(const Image& x_noisy, const DenoiseConfig& cfg) {
  return plan_steps(x_noisy, cfg, default_estimator(cfg));
}

Image tweedie_denoise(const Image& x_noisy, const ScoreModel& model, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("tweedie_denoise requires sigma > 0");
  const ScoreField s = model.score(x_noisy, sigma);
  require_same_shape(s, x_noisy, "score output");
  Image out = x_noisy;
  out.add_scaled(s, sigma * sigma);
  return out;
}

Image regularized_reverse(const Image& x_init, const Image& x_ref, const ScoreModel& model,
                          int n_prime, const DenoiseConfig& cfg, const NoiseSource& rng) {
  require_same_shape(x_init, x_ref, "regularized_reverse");
  if (n_prime < 0 || n_prime > cfg.schedule.n_steps()) {
    throw DomainError("N' must lie in [0, N]");
  }
  Image x = x_init;
  if (n_prime == 0) return x;
  const bool regularize = cfg.lambda > 0.0;
  Image ref_band;
  if (regularize) ref_band = lowpass(x_ref, LowFreqMask(x.rows(), x.cols(), cfg.omega_fraction));
  for (int i = n_prime - 1; i >= 0; --i) {
    x = pc_step(x, i, model, cfg.sampler, cfg.schedule, rng, Phase::denoise,
                cfg.corrector_in_denoise);
    if (regularize) x = lowfreq_mix_prepared(x, ref_band, cfg.lambda);
  }
  return x;
}

Image r2d2_denoise(const Image& x_noisy, const ScoreModel& model, const DenoiseConfig& cfg,
                   const NoiseSource& rng, const StepPlan& plan) {
  cfg.validate();
  return regularized_reverse(x_noisy, x_noisy, model, plan.n_prime, cfg, rng);
}

Image r2d2_denoise(const Image& x_noisy, const ScoreModel& model, const DenoiseConfig& cfg,
                   const NoiseSource& rng) {
  return r2d2_denoise(x_noisy, model, cfg, rng, plan_steps(x_noisy, cfg));
}

Image sr_enhance(const Image& x0, const ScoreModel& model, const DenoiseConfig& cfg,
                 const NoiseSource& rng) {
  cfg.validate();
  const int m = cfg.sr_steps;
  if (m == 0) return x0;
  const SrOperator op(cfg.sr_factor);
  op.check(x0);
  if (op.factor() == 1) return x0;  // every consistency step collapses onto x0

  Image x = x0;
  x.add_scaled(rng.normal_like(x0, {Phase::sr_init, static_cast<std::uint32_t>(m), 0}),
               cfg.schedule.sigma_at(m));
  for (int j = m - 1; j >= 0; --j) {
    Image stepped = pc_step(x, j, model, cfg.sampler, cfg.schedule, rng, Phase::sr,
                            cfg.corrector_in_sr);
    x = sr_data_consistency(stepped, x0, op, cfg.strict_literal_dc);
  }
  return x;
}

bool exceeds_sanity_bound(const Image& input, const Image& output, const NoiseSchedule& schedule) {
  return max_abs(output) > max_abs(input) + 5.0 * schedule.sigma_max() || !all_finite(output);
}

R2d2Result r2d2_plus(const Image& x_noisy, const ScoreModel& model, const DenoiseConfig& cfg,
                     const NoiseSource& rng, const StepPlan& plan) {
  cfg.validate();
  if (cfg.sr_steps > 0) SrOperator(cfg.sr_factor).check(x_noisy);
  R2d2Result result;
  result.plan = plan;
  auto start = std::chrono::steady_clock::now();
  Image denoised = r2d2_denoise(x_noisy, model, cfg, rng, plan);
  result.denoise_seconds = seconds_since(start);
  start = std::chrono::steady_clock::now();
  result.image = cfg.sr_steps > 0 ? sr_enhance(denoised, model, cfg, rng) : std::move(denoised);
  result.sr_seconds = seconds_since(start);
  result.sanity_exceeded = exceeds_sanity_bound(x_noisy, result.image, cfg.schedule);
  return result;
}

R2d2Result r2d2_plus(const Image& x_noisy, const ScoreModel& model, const DenoiseConfig& cfg,
                     const NoiseSource& rng) {
  cfg.validate();
  return r2d2_plus(x_noisy, model, cfg, rng, plan_steps(x_noisy, cfg));
}

R2d2Result r2d2_plus(const Image& x_noisy, const ScoreModel& model, const DenoiseConfig& cfg) {
  return r2d2_plus(x_noisy, model, cfg, NoiseSource(cfg.seed));
}

std::uint64_t ensemble_member_seed(std::uint64_t seed, int k) noexcept {
  return derive_seed(seed, static_cast<std::uint64_t>(k));
}

PosteriorEnsemble posterior_ensemble(const Image& x_noisy, const ScoreModel& model,
                                     const DenoiseConfig& cfg, int samples) {
  if (samples < 1) throw DomainError("posterior ensemble needs K >= 1");
  cfg.validate();
  PosteriorEnsemble ens;
  ens.plan = plan_steps(x_noisy, cfg);
  ens.samples.resize(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) ens.sample_seeds.push_back(ensemble_member_seed(cfg.seed, k));

  auto run_member = [&](std::size_t k) {
    ens.samples[k] =
        r2d2_plus(x_noisy, model, cfg, NoiseSource(ens.sample_seeds[k]), ens.plan).image;
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = model.thread_safe() ? std::min<unsigned>(hw, samples) : 1u;
  if (workers <= 1) {
    for (std::size_t k = 0; k < ens.samples.size(); ++k) run_member(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < ens.samples.size(); k = next++) {
          try {
            run_member(k);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }

  const std::size_t rows = x_noisy.rows(), cols = x_noisy.cols();
  ens.mean_map = Image(rows, cols);
  for (const auto& s : ens.samples) ens.mean_map += s;
  ens.mean_map *= 1.0 / static_cast<double>(samples);
  ens.std_map = Image(rows, cols);
  for (const auto& s : ens.samples) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double d = s[i] - ens.mean_map[i];
      ens.std_map[i] += d * d;
    }
  }
  for (double& v : ens.std_map.values()) v = std::sqrt(v / static_cast<double>(samples));
  return ens;
}

std::vector<double> default_alpha_grid() { return {0.2, 0.4, 0.6, 0.8, 1.0}; }

std::vector<SweepEntry> sweep_alpha(const Image& x_noisy, const ScoreModel& model,
                                    const DenoiseConfig& cfg, const std::vector<double>& alphas,
                                    const std::optional<RoiSpec>& signal_roi,
                                    const std::optional<RoiSpec>& background_roi) {
  for (double a : alphas) check_alpha(a);
  cfg.validate();
  const StepPlan base = plan_steps(x_noisy, cfg);
  std::vector<SweepEntry> out;
  out.reserve(alphas.size());
  for (double a : alphas) {
    SweepEntry e;
    e.alpha = a;
    e.plan = replan(base, cfg, a);
    e.seed = derive_seed(cfg.seed, std::bit_cast<std::uint64_t>(a));
    DenoiseConfig run_cfg = cfg;
    run_cfg.alpha = a;
    e.image = r2d2_plus(x_noisy, model, run_cfg, NoiseSource(e.seed), e.plan).image;
    e.rms_change = rms_diff(e.image, x_noisy);
    if (signal_roi) e.snr = snr(e.image, *signal_roi);
    if (signal_roi && background_roi) e.cnr = cnr(e.image, *signal_roi, *background_roi);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace r2d2
