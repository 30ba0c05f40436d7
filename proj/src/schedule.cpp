#include "r2d2/schedule.hpp"

#include <cmath>
#include <string>

#include "r2d2/errors.hpp"

namespace r2d2 {

NoiseSchedule::NoiseSchedule(double sigma_min, double sigma_max, int n_steps, double epsilon)
    : sigma_min_(sigma_min), sigma_max_(sigma_max), n_steps_(n_steps), epsilon_(epsilon) {
  if (!(sigma_min > 0.0) || !(sigma_max > sigma_min) || !std::isfinite(sigma_max)) {
    throw DomainError("noise schedule requires 0 < sigma_min < sigma_max");
  }
  if (n_steps < 2) throw DomainError("noise schedule requires n_steps >= 2");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw DomainError("noise schedule requires 0 < epsilon < 1");
  }
  log_ratio_ = std::log(sigma_max_ / sigma_min_);
}

double NoiseSchedule::sigma_continuous(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw DomainError("diffusion time " + std::to_string(t) + " outside [0, 1]");
  }
  if (t == 1.0) return sigma_max_;
  return sigma_min_ * std::exp(t * log_ratio_);
}

double NoiseSchedule::sigma_at(int i) const {
  if (i < 1 || i > n_steps_) {
    throw DomainError("schedule index " + std::to_string(i) + " outside [1, " +
                      std::to_string(n_steps_) + "]");
  }
  return sigma_continuous(static_cast<double>(i - 1) / static_cast<double>(n_steps_ - 1));
}

double NoiseSchedule::level(int i) const { return i == 0 ? 0.0 : sigma_at(i); }

InverseTime NoiseSchedule::sigma_inverse(double sigma) const {
  if (!(sigma > 0.0)) throw DomainError("sigma_inverse requires sigma > 0");
  InverseTime out;
  out.t = std::log(sigma / sigma_min_) / log_ratio_;
  if (out.t < epsilon_) {
    out.t = epsilon_;
    out.clamp = InverseTime::Clamp::low;
  } else if (out.t > 1.0) {
    out.t = 1.0;
    out.clamp = InverseTime::Clamp::high;
  }
  return out;
}

}  // namespace r2d2
