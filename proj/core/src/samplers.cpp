#include "uqband/samplers.hpp"

#include <cmath>

#include "uqband/priors.hpp"
#include "uqband/rng.hpp"

namespace uqband {

void ChainStats::update(const ImageGrid &x) {
  if (count == 0 && mean.empty()) {
    mean = ImageGrid(x.height(), x.width());
    m2 = ImageGrid(x.height(), x.width());
  }
  require_same_shape(x, mean, "welford update");
  ++count;
  const double inv_n = 1.0 / static_cast<double>(count);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double delta = x[k] - mean[k];
    mean[k] += delta * inv_n;
    m2[k] += delta * (x[k] - mean[k]);
  }
}

ImageGrid ChainStats::variance() const {
  if (count <= 0) throw StatError("variance of an empty chain");
  ImageGrid v(mean.height(), mean.width());
  const double inv_n = 1.0 / static_cast<double>(count);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = m2[k] * inv_n;
  return v;
}

ChainStats ChainStats::merge(const ChainStats &a, const ChainStats &b) {
  if (a.count == 0) return b;
  if (b.count == 0) return a;
  require_same_shape(a.mean, b.mean, "welford merge");
  ChainStats out(a.mean.height(), a.mean.width());
  out.count = a.count + b.count;
  const double na = static_cast<double>(a.count);
  const double nb = static_cast<double>(b.count);
  const double n = na + nb;
  for (std::size_t k = 0; k < out.mean.size(); ++k) {
    const double delta = b.mean[k] - a.mean[k];
    out.mean[k] = a.mean[k] + delta * (nb / n);
    out.m2[k] = a.m2[k] + b.m2[k] + delta * delta * (na * nb / n);
  }
  return out;
}

namespace {

struct Accumulator {
  long burn_in;
  long thinning;
  ChainStats stats;
  const ChainObserver &observer;

  Accumulator(int h, int w, long burn, long thin, const ChainObserver &obs)
      : burn_in(burn), thinning(thin), stats(h, w), observer(obs) {}

  // idx is the 1-based iterate number; keeps iterates burn_in+1,
  // burn_in+1+H, ... so H=1 keeps everything after burn-in.
  void offer(long idx, const ImageGrid &x) {
    if (idx <= burn_in) return;
    if ((idx - burn_in - 1) % thinning != 0) return;
    stats.update(x);
    if (observer) observer(idx, x, stats);
  }
};

void check_common(const PosteriorModel &model, double step, long iterations, long burn_in,
                  long thinning) {
  (void)model;
  if (!(step > 0.0)) throw ConfigError("sampler step size must be > 0");
  if (iterations <= 0) throw ConfigError("sampler iterations must be > 0");
  if (burn_in < 0 || burn_in >= iterations)
    throw ConfigError("burn-in must satisfy 0 <= burn_in < iterations");
  if (thinning < 1) throw ConfigError("thinning must be >= 1");
}

void check_finite(const ImageGrid &x, long iteration, const char *algo) {
  for (double v : x.data())
    if (!std::isfinite(v))
      throw DivergenceError(std::string(algo) + ": non-finite pixel in chain", iteration);
}

}  // namespace

ChainStats ula_run(const PosteriorModel &model, const UlaConfig &cfg,
                   const ChainObserver &observer) {
  check_common(model, cfg.step, cfg.iterations, cfg.burn_in, cfg.thinning);
  if (!model.prior_differentiable())
    throw ConfigError("ula requires a differentiable prior (huber_tv or foe)");
  const double lip = model.gradient_lipschitz();
  if (!(cfg.step < 2.0 / lip))
    throw ConfigError("ula step " + std::to_string(cfg.step) +
                      " violates step < 2/L with L = " + std::to_string(lip));

  const ImageGrid &z = model.likelihood.observation();
  ImageGrid x = cfg.init ? *cfg.init : z;
  require_same_shape(x, z, "ula init");
  NormalSampler rng(cfg.seed);
  const double noise_amp = cfg.noise_scale * std::sqrt(2.0 * cfg.step);
  Accumulator acc(x.height(), x.width(), cfg.burn_in, cfg.thinning, observer);
  for (long k = 0; k < cfg.iterations; ++k) {
    const ImageGrid g = model.gradient(x);
    for (std::size_t p = 0; p < x.size(); ++p)
      x[p] += -cfg.step * g[p] + noise_amp * rng();
    check_finite(x, k + 1, "ula");
    acc.offer(k + 1, x);
  }
  return acc.stats;
}

ChainStats pula_run(const PosteriorModel &model, const UlaConfig &cfg,
                    const ChainObserver &observer) {
  check_common(model, cfg.step, cfg.iterations, cfg.burn_in, cfg.thinning);
  if (!model.prior_differentiable())
    throw ConfigError("pula requires a differentiable prior (huber_tv or foe)");
  if (model.prior) {
    const double prior_lip = model.prior->gradient_lipschitz() / model.lambda;
    if (prior_lip > 0.0 && !(cfg.step < 2.0 / prior_lip))
      throw ConfigError("pula step violates step < 2/L_prior");
  }

  const ImageGrid &z = model.likelihood.observation();
  ImageGrid x = cfg.init ? *cfg.init : z;
  require_same_shape(x, z, "pula init");
  NormalSampler rng(cfg.seed);
  const double noise_amp = cfg.noise_scale * std::sqrt(2.0 * cfg.step);
  const double w = model.prior ? 1.0 / model.lambda : 0.0;
  Accumulator acc(x.height(), x.width(), cfg.burn_in, cfg.thinning, observer);
  for (long k = 0; k < cfg.iterations; ++k) {
    if (model.prior) {
      const ImageGrid g = model.prior->gradient(x);
      for (std::size_t p = 0; p < x.size(); ++p) x[p] -= cfg.step * w * g[p];
    }
    x = model.likelihood.prox(x, cfg.step);
    for (std::size_t p = 0; p < x.size(); ++p) x[p] += noise_amp * rng();
    check_finite(x, k + 1, "pula");
    acc.offer(k + 1, x);
  }
  return acc.stats;
}

ChainStats ulpda_run(const PosteriorModel &model, const UlpdaConfig &cfg,
                     const ChainObserver &observer) {
  check_common(model, cfg.tau, cfg.iterations, cfg.burn_in, cfg.thinning);
  if (model.prior && model.prior->name() != "tv")
    throw ConfigError("ulpda requires the tv prior (or prior off)");
  if (!(cfg.theta >= 0.0 && cfg.theta <= 1.0))
    throw ConfigError("ulpda theta must be in [0,1]");
  const double lsq = DiffOperator::norm_bound_sq;
  const double sigma = cfg.sigma > 0.0 ? cfg.sigma : 1.0 / (cfg.tau * lsq);
  if (cfg.sigma > 0.0 && cfg.sigma * cfg.tau * lsq > 1.0 + 1e-12)
    throw ConfigError("ulpda step sizes violate sigma*tau*L^2 <= 1");

  const ImageGrid &z = model.likelihood.observation();
  const int h = z.height(), w = z.width();
  const DiffOperator op(h, w);
  const double dual_box = model.prior ? 1.0 / model.lambda : 0.0;

  ImageGrid x = cfg.init ? *cfg.init : z;
  require_same_shape(x, z, "ulpda init");
  StackedField p(h, w), p_prev(h, w), pbar(h, w);
  NormalSampler rng(cfg.seed);
  const double noise_amp = cfg.noise_scale * std::sqrt(2.0 * cfg.tau);
  Accumulator acc(h, w, cfg.burn_in, cfg.thinning, observer);

  for (long k = 0; k < cfg.iterations; ++k) {
    for (std::size_t q = 0; q < p.size(); ++q)
      pbar.v[q] = p.v[q] + cfg.theta * (p.v[q] - p_prev.v[q]);

    const ImageGrid dtp = op.apply_adjoint(pbar);
    ImageGrid arg(h, w);
    for (std::size_t q = 0; q < arg.size(); ++q) arg[q] = x[q] - cfg.tau * dtp[q];
    x = model.likelihood.prox(arg, cfg.tau);
    for (std::size_t q = 0; q < x.size(); ++q) x[q] += noise_amp * rng();
    check_finite(x, k + 1, "ulpda");

    p_prev = p;
    const StackedField dx = op.apply(x);
    for (std::size_t q = 0; q < p.size(); ++q)
      p.v[q] = std::clamp(p.v[q] + sigma * dx.v[q], -dual_box, dual_box);

    acc.offer(k + 1, x);
  }
  return acc.stats;
}

}  // namespace uqband
