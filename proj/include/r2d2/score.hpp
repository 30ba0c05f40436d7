#pragma once

#include <vector>

#include "r2d2/image.hpp"
#include "r2d2/schedule.hpp"

namespace r2d2 {

/// Field with the shape of its image holding grad_x log p_sigma(x), in 1/intensity.
using ScoreField = Image;

/// Noise-conditional score model s(x, sigma) ~ grad_x log p_sigma(x).
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;

  virtual ScoreField score(const Image& x, double sigma) const = 0;

  /// Whether score() may be called concurrently from several threads.
  virtual bool thread_safe() const noexcept { return true; }
};

/// Exact score of an isotropic Gaussian prior N(m, s^2 I) convolved with N(0, sigma^2 I):
///   s(x, sigma) = -(x - m) / (s^2 + sigma^2)
/// With s = 0 this is the delta prior at m, i.e. the optimum of denoising score matching
/// for a single training image.
class GaussianPriorScore final : public ScoreModel {
 public:
  GaussianPriorScore(Image mean_image, double prior_std);

  const Image& mean_image() const noexcept { return mean_; }
  double prior_std() const noexcept { return prior_std_; }

  ScoreField score(const Image& x, double sigma) const override;

 private:
  Image mean_;
  double prior_std_;
};

/// Exact score of a mixture of isotropic Gaussians over whole images. Responsibilities
/// are evaluated in the log domain.
class GmmPriorScore final : public ScoreModel {
 public:
  struct Component {
    double weight;
    Image mean_image;
    double std;
  };

  explicit GmmPriorScore(std::vector<Component> components);

  const std::vector<Component>& components() const noexcept { return components_; }

  /// Posterior component probabilities at noise level sigma.
  std::vector<double> responsibilities(const Image& x, double sigma) const;

  ScoreField score(const Image& x, double sigma) const override;

 private:
  std::vector<Component> components_;
};

/// Free functions mirroring the model methods.
ScoreField gaussian_score(const GaussianPriorScore& model, const Image& x, double sigma);
ScoreField gmm_score(const GmmPriorScore& model, const Image& x, double sigma);

/// Weighted denoising-score-matching summand with lambda(t) = sigma(t)^2:
///   x_t = x0 + sigma(t) z,
///   loss = sigma(t)^2 * || s(x_t, sigma(t)) + z / sigma(t) ||^2 / numel
/// The regression target is the perturbation-kernel gradient -(x_t - x0) / sigma(t)^2.
double dsm_loss(const ScoreModel& model, const NoiseSchedule& schedule, const Image& x0,
                double t, const Image& z);

}  // namespace r2d2
