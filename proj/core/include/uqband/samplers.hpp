#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "uqband/model.hpp"

namespace uqband {

/// Streaming first/second moments of a Markov chain (Welford update).
/// variance() uses the population convention m2/count, matching the sample
/// variance estimator used for the posterior variance.
struct ChainStats {
  long count = 0;
  ImageGrid mean;
  ImageGrid m2;  // sum of squared deviations from the running mean

  ChainStats() = default;
  ChainStats(int height, int width) : mean(height, width), m2(height, width) {}

  void update(const ImageGrid &x);
  ImageGrid variance() const;

  /// Exact (up to roundoff) stats of the concatenated streams.
  static ChainStats merge(const ChainStats &a, const ChainStats &b);
};

/// Called once per accumulated (post burn-in, thinned) sample.
using ChainObserver = std::function<void(long iteration, const ImageGrid &x, const ChainStats &stats)>;

struct UlaConfig {
  double step = 1e-4;       // tau
  long iterations = 10000;  // K
  long burn_in = 0;
  long thinning = 1;  // H, keep every H-th post burn-in iterate
  std::uint64_t seed = 0;
  double noise_scale = 1.0;  // 0 turns the sampler into plain (prox-)gradient descent
  std::optional<ImageGrid> init;  // default: warm start at the observation
};

struct UlpdaConfig {
  double tau = 5e-5;    // primal step
  double sigma = 0.0;   // dual step; 0 = auto 1/(tau L^2)
  double theta = 1.0;   // dual extrapolation in [0,1]
  long iterations = 50000;
  long burn_in = 0;
  long thinning = 1;
  std::uint64_t seed = 0;
  double noise_scale = 1.0;
  std::optional<ImageGrid> init;  // default: warm start at the observation
};

/// Unadjusted Langevin algorithm:
///   x_{k+1} = x_k - tau grad E(x_k) + sqrt(2 tau) xi_k,  xi_k ~ N(0, Id).
/// Starts at x_0 = observation. Requires a differentiable (or absent) prior
/// and step < 2 / (1/sigma^2 + L_prior/lambda).
ChainStats ula_run(const PosteriorModel &model, const UlaConfig &cfg,
                   const ChainObserver &observer = nullptr);

/// Proximal-likelihood variant: the data-term gradient step is replaced by
/// its closed-form prox,
///   x_{k+1} = prox_data(x_k - (tau/lambda) grad prior(x_k), tau) + sqrt(2 tau) xi_k.
ChainStats pula_run(const PosteriorModel &model, const UlaConfig &cfg,
                    const ChainObserver &observer = nullptr);

/// Primal-dual Langevin iteration for E(x) = g(x) + f(Dx) with
/// f = (1/lambda)||.||_1 (anisotropic TV) and g the Gaussian data term:
///   pbar_k  = p_k + theta (p_k - p_{k-1})
///   x_{k+1} = prox_{tau g}(x_k - tau D^* pbar_k) + sqrt(2 tau) xi_k
///   p_{k+1} = prox_{sigma f^*}(p_k + sigma D x_{k+1})
/// Noise enters the primal variable only. x_0 = observation, p_0 = p_{-1} = 0.
/// Requires sigma tau L^2 <= 1 with L^2 <= 8 and a TV (or absent) prior.
ChainStats ulpda_run(const PosteriorModel &model, const UlpdaConfig &cfg,
                     const ChainObserver &observer = nullptr);

}  // namespace uqband
