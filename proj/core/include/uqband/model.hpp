#pragma once

#include <memory>
#include <string>

#include "uqband/image.hpp"

namespace uqband {

/// Gaussian data term for denoising: -log p(z|x) = (1/(2 sigma^2)) ||x - z||^2
/// up to a constant.
class GaussianLikelihood {
 public:
  GaussianLikelihood(double sigma, ImageGrid observation);

  double sigma() const { return sigma_; }
  const ImageGrid &observation() const { return observation_; }

  double energy(const ImageGrid &x) const;
  ImageGrid gradient(const ImageGrid &x) const;  // (x - z) / sigma^2

  /// prox of step * data term: argmin_u 1/2||u-x||^2 + (step/(2 sigma^2))||u-z||^2
  /// = (x + (step/sigma^2) z) / (1 + step/sigma^2).
  ImageGrid prox(const ImageGrid &x, double step) const;

  double gradient_lipschitz() const { return 1.0 / (sigma_ * sigma_); }

 private:
  double sigma_;
  ImageGrid observation_;
};

/// Prior energy interface. Gradient access is optional (TV has none);
/// samplers query differentiable() before asking for it.
class Prior {
 public:
  virtual ~Prior() = default;
  virtual std::string name() const = 0;
  virtual double energy(const ImageGrid &x) const = 0;
  virtual bool differentiable() const = 0;
  virtual ImageGrid gradient(const ImageGrid &x) const;
  /// Upper bound on the Lipschitz constant of the gradient, for step-size checks.
  virtual double gradient_lipschitz() const;
};

/// Likelihood + prior with weight: E(x) = data(x) + (1/lambda) prior(x).
/// Additive constants are dropped throughout; only gradients and proxes
/// matter for sampling.
struct PosteriorModel {
  GaussianLikelihood likelihood;
  std::shared_ptr<const Prior> prior;  // null = prior off (pure Gaussian posterior)
  double lambda = 1.0;

  PosteriorModel(GaussianLikelihood lik, std::shared_ptr<const Prior> p, double lam);

  double energy(const ImageGrid &x) const;
  ImageGrid gradient(const ImageGrid &x) const;
  double gradient_lipschitz() const;
  bool prior_differentiable() const { return !prior || prior->differentiable(); }
};

}  // namespace uqband
