#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "r2d2/consistency.hpp"
#include "r2d2/diffusion.hpp"
#include "r2d2/estimation.hpp"
#include "r2d2/image.hpp"
#include "r2d2/metrics.hpp"
#include "r2d2/random.hpp"
#include "r2d2/schedule.hpp"
#include "r2d2/score.hpp"

namespace r2d2 {

struct DenoiseConfig {
  static constexpr double kDefaultAlpha = 0.2;
  static constexpr double kDefaultLambda = 0.005;
  static constexpr int kDefaultSrFactor = 2;
  static constexpr int kDefaultSrSteps = 20;

  NoiseSchedule schedule;
  SamplerSettings sampler;
  double alpha = kDefaultAlpha;
  double lambda = kDefaultLambda;
  double omega_fraction = LowFreqMask::kDefaultFraction;
  int sr_factor = kDefaultSrFactor;
  int sr_steps = kDefaultSrSteps;
  std::uint64_t seed = 0;
  std::optional<double> sigma_override;
  bool strict_literal_dc = false;
  bool corrector_in_denoise = true;
  bool corrector_in_sr = true;
  int patch_size = kDefaultPatchSize;

  void validate() const;
};

/// Where the hijacked reverse process starts.
struct StepPlan {
  double sigma_est = 0.0;
  double t_prime = 0.0;
  int n_prime = 0;
  InverseTime::Clamp clamp = InverseTime::Clamp::none;
  bool from_override = false;
  std::optional<NoiseEstimate> estimate;
};

using NoiseEstimator = std::function<NoiseEstimate(const Image&)>;

/// Patch-covariance estimator with the config's patch size.
NoiseEstimator default_estimator(const DenoiseConfig& cfg);

/// sigma_est from the override or the estimator, t' = sigma^-1(sigma_est), and
/// N' = round(alpha t' N). Estimates below sigma_min give N' = 0.
StepPlan plan_steps(const Image& x_noisy, const DenoiseConfig& cfg,
                    const NoiseEstimator& estimator);
StepPlan plan_steps(const Image& x_noisy, const DenoiseConfig& cfg);

/// N' for a given alpha with the estimate of `base` reused.
StepPlan replan(const StepPlan& base, const DenoiseConfig& cfg, double alpha);

/// x + sigma^2 s(x, sigma): the posterior mean for Gaussian corruption of level sigma.
Image tweedie_denoise(const Image& x_noisy, const ScoreModel& model, double sigma);

/// N' regularized PC steps starting from x_init at index N': each step applies pc_step and
/// then mixes in lambda times the low band of x_ref.
Image regularized_reverse(const Image& x_init, const Image& x_ref, const ScoreModel& model,
                          int n_prime, const DenoiseConfig& cfg, const NoiseSource& rng);

/// Hijacked reverse diffusion with low-frequency regularization against the input.
Image r2d2_denoise(const Image& x_noisy, const ScoreModel& model, const DenoiseConfig& cfg,
                   const NoiseSource& rng, const StepPlan& plan);
Image r2d2_denoise(const Image& x_noisy, const ScoreModel& model, const DenoiseConfig& cfg,
                   const NoiseSource& rng);

/// SR refinement of a denoised image: x_M = x0 + sigma_M z, then M solver steps each
/// followed by the down-up data consistency map.
Image sr_enhance(const Image& x0, const ScoreModel& model, const DenoiseConfig& cfg,
                 const NoiseSource& rng);

struct R2d2Result {
  Image image;
  StepPlan plan;
  double denoise_seconds = 0.0;
  double sr_seconds = 0.0;
  /// Some output magnitude exceeds max|input| + 5 sigma_max (reported, not clamped).
  bool sanity_exceeded = false;
};

/// Denoise then (when sr_steps > 0) SR.
R2d2Result r2d2_plus(const Image& x_noisy, const ScoreModel& model, const DenoiseConfig& cfg,
                     const NoiseSource& rng, const StepPlan& plan);
R2d2Result r2d2_plus(const Image& x_noisy, const ScoreModel& model, const DenoiseConfig& cfg,
                     const NoiseSource& rng);
R2d2Result r2d2_plus(const Image& x_noisy, const ScoreModel& model, const DenoiseConfig& cfg);

bool exceeds_sanity_bound(const Image& input, const Image& output, const NoiseSchedule& schedule);

struct PosteriorEnsemble {
  static constexpr int kDefaultSamples = 5;

  std::vector<Image> samples;
  std::vector<std::uint64_t> sample_seeds;
  Image mean_map;
  /// Pixelwise population std.
  Image std_map;
  StepPlan plan;
};

/// Seed used for ensemble member k.
std::uint64_t ensemble_member_seed(std::uint64_t seed, int k) noexcept;

/// K independent r2d2_plus runs from derived seeds. Members run concurrently when the
/// model is thread-safe; results do not depend on scheduling.
PosteriorEnsemble posterior_ensemble(const Image& x_noisy, const ScoreModel& model,
                                     const DenoiseConfig& cfg, int samples);

struct SweepEntry {
  double alpha = 0.0;
  StepPlan plan;
  Image image;
  std::uint64_t seed = 0;
  /// RMS change relative to the input.
  double rms_change = 0.0;
  std::optional<double> snr;
  std::optional<double> cnr;
};

std::vector<double> default_alpha_grid();

/// One r2d2_plus per alpha sharing one noise estimate. Entries with equal alpha get the
/// same derived seed and so identical output. SNR/CNR attach when ROIs are given.
std::vector<SweepEntry> sweep_alpha(const Image& x_noisy, const ScoreModel& model,
                                    const DenoiseConfig& cfg, const std::vector<double>& alphas,
                                    const std::optional<RoiSpec>& signal_roi = std::nullopt,
                                    const std::optional<RoiSpec>& background_roi = std::nullopt);

}  // namespace r2d2
