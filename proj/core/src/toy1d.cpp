#include "uqband/toy1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "uqband/errors.hpp"

namespace uqband::toy1d {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

inline double normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return std::exp(-0.5 * d * d / var) / std::sqrt(kTwoPi * var);
}

inline double normal_cdf(double x, double mean, double var) {
  return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * var));
}

}  // namespace

MixtureSpec MixtureSpec::default_spec() {
  MixtureSpec s;
  s.centers = {-1.0, 0.0, 1.0};
  s.component_vars = {0.05 * 0.05, 0.05 * 0.05, 0.05 * 0.05};
  s.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  s.noise_var = 0.3 * 0.3;
  return s;
}

void MixtureSpec::validate() const {
  if (centers.empty() || centers.size() != component_vars.size() ||
      centers.size() != weights.size())
    throw ConfigError("mixture spec needs matching nonempty parameter lists");
  double wsum = 0.0;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    if (!(component_vars[k] > 0.0)) throw ConfigError("mixture component variances must be > 0");
    if (!(weights[k] > 0.0)) throw ConfigError("mixture weights must be > 0");
    wsum += weights[k];
  }
  if (std::abs(wsum - 1.0) > 1e-12) throw ConfigError("mixture weights must sum to 1");
  if (!(noise_var > 0.0)) throw ConfigError("noise variance must be > 0");
}

double prior_density(const MixtureSpec &spec, double x) {
  double p = 0.0;
  for (int k = 0; k < spec.component_count(); ++k)
    p += spec.weights[k] * normal_pdf(x, spec.centers[k], spec.component_vars[k]);
  return p;
}

double observation_density(const MixtureSpec &spec, double z) {
  double p = 0.0;
  for (int k = 0; k < spec.component_count(); ++k)
    p += spec.weights[k] * normal_pdf(z, spec.centers[k], spec.component_vars[k] + spec.noise_var);
  return p;
}

double joint_xz_density(const MixtureSpec &spec, double x, double z) {
  return prior_density(spec, x) * normal_pdf(z, x, spec.noise_var);
}

PosteriorMoments posterior_moments(const MixtureSpec &spec, double z) {
  spec.validate();
  const int kk = spec.component_count();
  PosteriorMoments out;
  out.weights.resize(kk);
  out.comp_means.resize(kk);
  out.comp_vars.resize(kk);

  // Component responsibilities in log space for stability far in the tails.
  std::vector<double> lw(kk);
  double lmax = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < kk; ++k) {
    const double v = spec.component_vars[k] + spec.noise_var;
    const double d = z - spec.centers[k];
    lw[k] = std::log(spec.weights[k]) - 0.5 * std::log(kTwoPi * v) - 0.5 * d * d / v;
    lmax = std::max(lmax, lw[k]);
  }
  double wsum = 0.0;
  for (int k = 0; k < kk; ++k) {
    out.weights[k] = std::exp(lw[k] - lmax);
    wsum += out.weights[k];
  }
  for (int k = 0; k < kk; ++k) out.weights[k] /= wsum;

  for (int k = 0; k < kk; ++k) {
    const double prec = 1.0 / spec.component_vars[k] + 1.0 / spec.noise_var;
    out.comp_vars[k] = 1.0 / prec;
    out.comp_means[k] =
        out.comp_vars[k] * (spec.centers[k] / spec.component_vars[k] + z / spec.noise_var);
  }

  double mean = 0.0;
  for (int k = 0; k < kk; ++k) mean += out.weights[k] * out.comp_means[k];
  double second = 0.0;
  for (int k = 0; k < kk; ++k)
    second += out.weights[k] * (out.comp_vars[k] + out.comp_means[k] * out.comp_means[k]);
  out.mean = mean;
  out.var = second - mean * mean;
  return out;
}

ErrorDistribution::ErrorDistribution(const MixtureSpec &spec, double z)
    : moments_(posterior_moments(spec, z)) {}

double ErrorDistribution::cdf(double s) const {
  if (s <= 0.0) return 0.0;
  const double u = std::sqrt(s);
  double hi = 0.0, lo = 0.0;
  for (std::size_t k = 0; k < moments_.weights.size(); ++k) {
    hi += moments_.weights[k] *
          normal_cdf(moments_.mean + u, moments_.comp_means[k], moments_.comp_vars[k]);
    lo += moments_.weights[k] *
          normal_cdf(moments_.mean - u, moments_.comp_means[k], moments_.comp_vars[k]);
  }
  return hi - lo;
}

double ErrorDistribution::quantile(double q) const {
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("quantile level q must be in (0,1)");
  // Bracket then bisect; the CDF is continuous and strictly increasing on
  // the support.
  double hi = moments_.var;
  for (int i = 0; i < 200 && cdf(hi) < q; ++i) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < q)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

JointDensity::JointDensity(const MixtureSpec &spec, int grid_points, double span_sigmas)
    : spec_(spec) {
  spec_.validate();
  if (grid_points < 16) throw ConfigError("joint density grid needs >= 16 points");
  double vmax = 0.0;
  for (double v : spec_.component_vars) vmax = std::max(vmax, v);
  const double spread = std::sqrt(vmax + spec_.noise_var);
  const double zlo =
      *std::min_element(spec_.centers.begin(), spec_.centers.end()) - span_sigmas * spread;
  const double zhi =
      *std::max_element(spec_.centers.begin(), spec_.centers.end()) + span_sigmas * spread;

  z_.resize(grid_points);
  t_.resize(grid_points);
  t_min_ = std::numeric_limits<double>::infinity();
  t_max_ = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    z_[i] = zlo + (zhi - zlo) * i / (grid_points - 1);
    t_[i] = posterior_moments(spec_, z_[i]).var;
    t_min_ = std::min(t_min_, t_[i]);
    t_max_ = std::max(t_max_, t_[i]);
  }
}

std::vector<JointDensity::Root> JointDensity::roots(double t) const {
  if (!(t >= t_min_ && t <= t_max_))
    throw DomainError("t outside the attainable posterior-variance range");
  std::vector<Root> out;
  for (std::size_t i = 0; i + 1 < z_.size(); ++i) {
    // Half-open bracket test so a root sitting exactly on a grid node is
    // counted once.
    const bool below0 = t_[i] <= t;
    const bool below1 = t_[i + 1] <= t;
    if (below0 == below1) continue;
    const double dt = t_[i + 1] - t_[i];
    // Tangential brackets are skipped: at a fold of t(z) the two nodes
    // straddling the extremum carry nearly equal t values and the
    // grid-difference slope is meaningless.
    if (std::abs(dt) <= 1e-10 * std::max(std::abs(t_[i]), std::abs(t_[i + 1]))) continue;
    double lo = z_[i], hi = z_[i + 1];
    double flo = t_[i] - t;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fmid = posterior_moments(spec_, mid).var - t;
      if ((fmid <= 0.0) == (flo <= 0.0)) {
        lo = mid;
        flo = fmid;
      } else {
        hi = mid;
      }
    }
    out.push_back({0.5 * (lo + hi), (z_[i + 1] - z_[i]) / dt});
  }
  return out;
}

double JointDensity::density(double s, double t) const {
  const double out = density_profile(t, std::span<const double>(&s, 1))[0];
  return out;
}

std::vector<double> JointDensity::density_profile(double t,
                                                  std::span<const double> s_values) const {
  const std::vector<Root> rs = roots(t);
  std::vector<double> centers(rs.size());
  for (std::size_t k = 0; k < rs.size(); ++k)
    centers[k] = posterior_moments(spec_, rs[k].z).mean;

  std::vector<double> out(s_values.size(), 0.0);
  for (std::size_t i = 0; i < s_values.size(); ++i) {
    const double s = s_values[i];
    if (!(s > 0.0)) throw DomainError("joint density needs s > 0");
    const double u = std::sqrt(s);
    double p = 0.0;
    for (std::size_t k = 0; k < rs.size(); ++k) {
      const double jac = std::abs(rs[k].slope) / (2.0 * u);
      p += (joint_xz_density(spec_, centers[k] + u, rs[k].z) +
            joint_xz_density(spec_, centers[k] - u, rs[k].z)) *
           jac;
    }
    out[i] = p;
  }
  return out;
}

namespace {

// Fixed-t section of the joint density: along it the s-integral of each
// root's contribution collapses to the error CDF at that root's
// observation, weighted by the observation density times |dz/dt|.
struct Section {
  std::vector<double> w;
  std::vector<ErrorDistribution> err;
  double den = 0.0;

  double cdf(double s) const {
    if (s <= 0.0) return 0.0;
    double num = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) num += w[k] * err[k].cdf(s);
    return num / den;
  }
};

Section make_section(const MixtureSpec &spec, const std::vector<JointDensity::Root> &roots) {
  Section sec;
  for (const auto &r : roots) {
    sec.w.push_back(observation_density(spec, r.z) * std::abs(r.slope));
    sec.err.emplace_back(spec, r.z);
    sec.den += sec.w.back();
  }
  if (sec.den == 0.0) throw DomainError("conditional cdf undefined at this t");
  return sec;
}

}  // namespace

double JointDensity::conditional_cdf(double t, double s) const {
  return make_section(spec_, roots(t)).cdf(s);
}

double JointDensity::conditional_quantile(double t, double q) const {
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("quantile level q must be in (0,1)");
  const Section sec = make_section(spec_, roots(t));
  double hi = t;
  for (int i = 0; i < 200 && sec.cdf(hi) < q; ++i) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < 120; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (sec.cdf(mid) < q)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::pair<double, double> sample_xz(const MixtureSpec &spec, NormalSampler &rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  int pick = spec.component_count() - 1;
  for (int k = 0; k < spec.component_count(); ++k) {
    acc += spec.weights[k];
    if (u < acc) {
      pick = k;
      break;
    }
  }
  const double x = spec.centers[pick] + std::sqrt(spec.component_vars[pick]) * rng();
  const double z = x + std::sqrt(spec.noise_var) * rng();
  return {x, z};
}

ToyPipelineResult toy_pipeline_check(const MixtureSpec &spec, long m, long n, double q,
                                     std::uint64_t seed, int interior_bins, double ess_sup) {
  spec.validate();
  if (m < 100 || n < 100) throw ConfigError("toy pipeline needs m, n >= 100");
  NormalSampler rng(seed);

  std::vector<conformal::CalibrationRecord> records;
  records.reserve(m);
  for (long i = 0; i < m; ++i) {
    const auto [x, z] = sample_xz(spec, rng);
    const PosteriorMoments pm = posterior_moments(spec, z);
    const double err = pm.mean - x;
    records.push_back({err * err, pm.var});
  }

  const auto bins = conformal::BinningScheme::for_records(records, interior_bins);
  ToyPipelineResult result;
  result.table = conformal::build_table(records, bins, q, ess_sup);

  const int nbins = bins.bin_count();
  std::vector<long> bin_tests(nbins, 0), bin_hits(nbins, 0);
  long hits = 0;
  for (long j = 0; j < n; ++j) {
    const auto [x, z] = sample_xz(spec, rng);
    const PosteriorMoments pm = posterior_moments(spec, z);
    const double err = pm.mean - x;
    const double s = err * err;
    const int b = bins.bin_of(pm.var);
    const bool covered = s <= result.table.quantiles[b];
    ++bin_tests[b];
    if (covered) {
      ++bin_hits[b];
      ++hits;
    }
  }
  result.coverage = static_cast<double>(hits) / static_cast<double>(n);

  const JointDensity joint(spec);
  result.bins.resize(nbins);
  for (int k = 0; k < nbins; ++k) {
    ToyBinRow &row = result.bins[k];
    const auto [lo, hi] = bins.bin_range(k);
    row.t_lo = lo;
    row.t_hi = hi;
    row.n_cal = result.table.counts[k];
    row.conformal_q = result.table.quantiles[k];
    row.n_test = bin_tests[k];
    row.bin_coverage =
        bin_tests[k] > 0 ? static_cast<double>(bin_hits[k]) / bin_tests[k] : 0.0;
    // Exact conditional quantile at a representative t inside both the bin
    // and the attainable range (geometric midpoint for interior bins).
    double tc = std::numeric_limits<double>::quiet_NaN();
    const double alo = std::max(lo, joint.t_min() * 1.0001);
    const double ahi = std::min(std::isinf(hi) ? joint.t_max() : hi, joint.t_max() * 0.9999);
    if (alo < ahi) tc = alo > 0.0 ? std::sqrt(alo * ahi) : 0.5 * (alo + ahi);
    row.exact_q = std::isnan(tc) ? tc : joint.conditional_quantile(tc, q);
  }
  return result;
}

}  // namespace uqband::toy1d
