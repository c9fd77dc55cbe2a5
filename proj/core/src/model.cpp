#include "uqband/model.hpp"

namespace uqband {

GaussianLikelihood::GaussianLikelihood(double sigma, ImageGrid observation)
    : sigma_(sigma), observation_(std::move(observation)) {
  if (!(sigma > 0.0)) throw ConfigError("likelihood sigma must be > 0");
  if (observation_.empty()) throw ConfigError("likelihood observation is empty");
  if (!observation_.all_finite()) throw ConfigError("likelihood observation has non-finite pixels");
}

double GaussianLikelihood::energy(const ImageGrid &x) const {
  require_same_shape(x, observation_, "data energy");
  const double w = 1.0 / (2.0 * sigma_ * sigma_);
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - observation_[k];
    acc += d * d;
  }
  return w * acc;
}

ImageGrid GaussianLikelihood::gradient(const ImageGrid &x) const {
  require_same_shape(x, observation_, "data gradient");
  const double inv_var = 1.0 / (sigma_ * sigma_);
  ImageGrid g(x.height(), x.width());
  for (std::size_t k = 0; k < x.size(); ++k) g[k] = (x[k] - observation_[k]) * inv_var;
  return g;
}

ImageGrid GaussianLikelihood::prox(const ImageGrid &x, double step) const {
  require_same_shape(x, observation_, "data prox");
  if (!(step > 0.0)) throw ConfigError("prox step must be > 0");
  const double a = step / (sigma_ * sigma_);
  const double inv = 1.0 / (1.0 + a);
  ImageGrid u(x.height(), x.width());
  for (std::size_t k = 0; k < x.size(); ++k) u[k] = (x[k] + a * observation_[k]) * inv;
  return u;
}

ImageGrid Prior::gradient(const ImageGrid &) const {
  throw ConfigError("prior '" + name() + "' has no gradient");
}

double Prior::gradient_lipschitz() const {
  throw ConfigError("prior '" + name() + "' has no gradient Lipschitz bound");
}

PosteriorModel::PosteriorModel(GaussianLikelihood lik, std::shared_ptr<const Prior> p,
                               double lam)
    : likelihood(std::move(lik)), prior(std::move(p)), lambda(lam) {
  if (!(lambda > 0.0)) throw ConfigError("prior weight lambda must be > 0");
}

double PosteriorModel::energy(const ImageGrid &x) const {
  double e = likelihood.energy(x);
  if (prior) e += prior->energy(x) / lambda;
  return e;
}

ImageGrid PosteriorModel::gradient(const ImageGrid &x) const {
  ImageGrid g = likelihood.gradient(x);
  if (prior) {
    const ImageGrid pg = prior->gradient(x);
    const double w = 1.0 / lambda;
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += w * pg[k];
  }
  return g;
}

double PosteriorModel::gradient_lipschitz() const {
  double lip = likelihood.gradient_lipschitz();
  if (prior) lip += prior->gradient_lipschitz() / lambda;
  return lip;
}

}  // namespace uqband
