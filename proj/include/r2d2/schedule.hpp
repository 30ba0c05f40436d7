#pragma once

namespace r2d2 {

/// Result of mapping a noise level back to diffusion time.
struct InverseTime {
  enum class Clamp { none, low, high };

  double t = 0.0;
  Clamp clamp = Clamp::none;

  bool clamped() const noexcept { return clamp != Clamp::none; }
};

/// Geometric variance-exploding noise schedule
///   sigma(t) = sigma_min * (sigma_max / sigma_min)^t,  t in [0, 1]
/// discretized on N uniform time points: sigma_i = sigma((i - 1) / (N - 1)), i = 1..N.
///
/// Immutable after construction.
class NoiseSchedule {
 public:
  static constexpr double kDefaultSigmaMin = 0.01;
  static constexpr double kDefaultSigmaMax = 378.0;
  static constexpr int kDefaultSteps = 1000;
  static constexpr double kDefaultEpsilon = 1e-5;

  NoiseSchedule() : NoiseSchedule(kDefaultSigmaMin, kDefaultSigmaMax, kDefaultSteps) {}
  NoiseSchedule(double sigma_min, double sigma_max, int n_steps,
                double epsilon = kDefaultEpsilon);

  double sigma_min() const noexcept { return sigma_min_; }
  double sigma_max() const noexcept { return sigma_max_; }
  int n_steps() const noexcept { return n_steps_; }
  double epsilon() const noexcept { return epsilon_; }

  double sigma_continuous(double t) const;

  /// sigma_i for 1 <= i <= N.
  double sigma_at(int i) const;

  /// Noise level at reverse-solver index i in [0, N]: sigma_at(i) for i >= 1 and 0 at
  /// i = 0, the terminal (noise-free) state of the reverse chain.
  double level(int i) const;

  /// t' = ln(sigma / sigma_min) / ln(sigma_max / sigma_min), clamped to [epsilon, 1].
  InverseTime sigma_inverse(double sigma) const;

 private:
  double sigma_min_;
  double sigma_max_;
  int n_steps_;
  double epsilon_;
  double log_ratio_;
};

}  // namespace r2d2
