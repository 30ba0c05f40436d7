#include "r2d2/score.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "r2d2/errors.hpp"

namespace r2d2 {

namespace {

void require_positive_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DomainError("score requires a finite sigma > 0");
  }
}

}  // namespace

GaussianPriorScore::GaussianPriorScore(Image mean_image, double prior_std)
    : mean_(std::move(mean_image)), prior_std_(prior_std) {
  if (!(prior_std >= 0.0) || !std::isfinite(prior_std)) {
    throw DomainError("Gaussian prior std must be finite and >= 0");
  }
  if (!all_finite(mean_)) throw DomainError("Gaussian prior mean must be finite");
}

ScoreField GaussianPriorScore::score(const Image& x, double sigma) const {
  require_positive_sigma(sigma);
  require_same_shape(x, mean_, "gaussian_score");
  const double inv_var = 1.0 / (prior_std_ * prior_std_ + sigma * sigma);
  ScoreField out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = -(x[i] - mean_[i]) * inv_var;
  return out;
}

GmmPriorScore::GmmPriorScore(std::vector<Component> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw DomainError("GMM prior needs at least one component");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight > 0.0)) throw DomainError("GMM weights must be positive");
    if (!(c.std >= 0.0)) throw DomainError("GMM component std must be >= 0");
    require_same_shape(c.mean_image, components_.front().mean_image, "GMM component means");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DomainError("GMM weights must sum to 1");
}

std::vector<double> GmmPriorScore::responsibilities(const Image& x, double sigma) const {
  require_positive_sigma(sigma);
  const double n = static_cast<double>(x.size());
  std::vector<double> log_r(components_.size());
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    require_same_shape(x, c.mean_image, "gmm_score");
    const double var = c.std * c.std + sigma * sigma;
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - c.mean_image[i];
      sq += d * d;
    }
    // 2*pi is common to all components and cancels
    log_r[k] = std::log(c.weight) - 0.5 * n * std::log(var) - 0.5 * sq / var;
  }
  const double peak = *std::max_element(log_r.begin(), log_r.end());
  double total = 0.0;
  for (double& v : log_r) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : log_r) v /= total;
  return log_r;
}

ScoreField GmmPriorScore::score(const Image& x, double sigma) const {
  const auto resp = responsibilities(x, sigma);
  ScoreField out(x.rows(), x.cols());
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    const double w = resp[k] / (c.std * c.std + sigma * sigma);
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] -= w * (x[i] - c.mean_image[i]);
  }
  return out;
}

ScoreField gaussian_score(const GaussianPriorScore& model, const Image& x, double sigma) {
  return model.score(x, sigma);
}

ScoreField gmm_score(const GmmPriorScore& model, const Image& x, double sigma) {
  return model.score(x, sigma);
}

double dsm_loss(const ScoreModel& model, const NoiseSchedule& schedule, const Image& x0,
                double t, const Image& z) {
  if (!(t >= schedule.epsilon() && t <= 1.0)) {
    throw DomainError("dsm_loss requires t in [epsilon, 1]");
  }
  require_same_shape(x0, z, "dsm_loss");
  const double sigma = schedule.sigma_continuous(t);
  Image xt = x0;
  xt.add_scaled(z, sigma);
  const ScoreField s = model.score(xt, sigma);
  require_same_shape(s, x0, "dsm_loss score output");
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double r = s[i] + z[i] / sigma;
    acc += r * r;
  }
  return sigma * sigma * acc / static_cast<double>(x0.size());
}

}  // namespace r2d2
