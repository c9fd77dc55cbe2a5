#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uqband/conformal.hpp"
#include "uqband/rng.hpp"

namespace uqband::toy1d {

/// Scalar ground-truth model: X ~ sum_k alpha_k N(c_k, var_x_k),
/// Z = X + N(0, noise_var). Everything downstream (posterior moments, error
/// quantiles, the joint error/variance density) is available in closed or
/// quadrature-free form, which makes this the end-to-end oracle for the
/// conformal pipeline.
struct MixtureSpec {
  std::vector<double> centers;
  std::vector<double> component_vars;
  std::vector<double> weights;
  double noise_var = 0.0;

  /// Three well-separated modes at -1, 0, 1 with sigma_x = 0.05,
  /// equal weights, sigma_z = 0.3.
  static MixtureSpec default_spec();

  void validate() const;
  int component_count() const { return static_cast<int>(centers.size()); }
};

/// Prior density p(x).
double prior_density(const MixtureSpec &spec, double x);
/// Marginal density of the observation, p_Z(z); components get inflated
/// variance var_x_k + noise_var.
double observation_density(const MixtureSpec &spec, double z);
/// Joint density p(x,z) = p(x) N(z; x, noise_var).
double joint_xz_density(const MixtureSpec &spec, double x, double z);

/// Conjugate posterior p(x|z): a Gaussian mixture with per-component
/// variance (1/var_x_k + 1/noise_var)^-1 and reweighted components.
struct PosteriorMoments {
  double mean = 0.0;
  double var = 0.0;
  std::vector<double> weights;
  std::vector<double> comp_means;
  std::vector<double> comp_vars;
};
PosteriorMoments posterior_moments(const MixtureSpec &spec, double z);

/// Distribution of the squared prediction error S = (X - E[X|Z=z])^2 under
/// p(x|z), via mixture CDF evaluation at +-sqrt(s).
class ErrorDistribution {
 public:
  ErrorDistribution(const MixtureSpec &spec, double z);
  double cdf(double s) const;
  double quantile(double q) const;
  double posterior_mean() const { return moments_.mean; }
  double posterior_var() const { return moments_.var; }

 private:
  PosteriorMoments moments_;
};

/// Joint density p(s,t) of error and posterior variance, computed by a
/// change of variables: for a query (s,t) every intersection point of the
/// two level sets contributes p(x,z) |(1/(2 sqrt(s))) dz/dt|, with dz/dt
/// taken from the adjacent nodes of a dense z grid bracketing the root.
class JointDensity {
 public:
  explicit JointDensity(const MixtureSpec &spec, int grid_points = 10000,
                        double span_sigmas = 6.0);

  double density(double s, double t) const;

  /// density(s, t) for many s at one t, sharing the level-set roots.
  std::vector<double> density_profile(double t, std::span<const double> s_values) const;

  /// Attainable range of t(z) over the sampled grid.
  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }

  struct Root {
    double z;      // refined level-set intersection in z
    double slope;  // (z1 - z0)/(t1 - t0) of the bracketing grid nodes
  };
  /// All z with t(z) = t; tangential brackets are skipped.
  std::vector<Root> roots(double t) const;

  /// P[S <= s | T = t] and its q-quantile along a fixed-t section.
  double conditional_cdf(double t, double s) const;
  double conditional_quantile(double t, double q) const;

  const std::vector<double> &z_grid() const { return z_; }
  const std::vector<double> &t_of_z() const { return t_; }

 private:
  MixtureSpec spec_;
  std::vector<double> z_;
  std::vector<double> t_;
  double t_min_ = 0.0;
  double t_max_ = 0.0;
};

/// One draw (x, z) from the generative model.
std::pair<double, double> sample_xz(const MixtureSpec &spec, NormalSampler &rng);

struct ToyBinRow {
  double t_lo = 0.0;
  double t_hi = 0.0;
  long n_cal = 0;
  double conformal_q = 0.0;
  double exact_q = 0.0;  // NaN when the bin misses the attainable t range
  double bin_coverage = 0.0;
  long n_test = 0;
};

struct ToyPipelineResult {
  double coverage = 0.0;
  conformal::QuantileTable table;
  std::vector<ToyBinRow> bins;
};

/// Full conformal pipeline on synthetic draws: m calibration pairs with
/// exact posterior mean/variance as the predictors, a conformalized table
/// over variance bins, then marginal and per-bin coverage on n test pairs.
ToyPipelineResult toy_pipeline_check(const MixtureSpec &spec, long m, long n, double q,
                                     std::uint64_t seed, int interior_bins = 25,
                                     double ess_sup = 25.0);

}  // namespace uqband::toy1d
