// Independent reference implementations used to pin expected test values.
// Everything here is deliberately brute force and kept free of the library
// code paths it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "uqband/bp.hpp"
#include "uqband/image.hpp"

namespace oracles {

// Central finite differences of a scalar field functional, step h per pixel.
inline uqband::ImageGrid fd_gradient(const std::function<double(const uqband::ImageGrid &)> &f,
                                     const uqband::ImageGrid &x, double h = 1e-5) {
  uqband::ImageGrid g(x.height(), x.width());
  uqband::ImageGrid xp = x;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double orig = xp[k];
    xp[k] = orig + h;
    const double fp = f(xp);
    xp[k] = orig - h;
    const double fm = f(xp);
    xp[k] = orig;
    g[k] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline double rel_error(const uqband::ImageGrid &a, const uqband::ImageGrid &b) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    num += d * d;
    den += b[k] * b[k];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

// Two-pass mean and population variance.
inline std::pair<double, double> two_pass_stats(const std::vector<double> &xs) {
  double mean = 0.0;
  for (double v : xs) mean += v;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double v : xs) var += (v - mean) * (v - mean);
  var /= static_cast<double>(xs.size());
  return {mean, var};
}

// Sort + index conformalized quantile.
inline double sorted_conformal_quantile(std::vector<double> values, double q, double ess_sup) {
  const auto n = values.size();
  const double rank = std::ceil((static_cast<double>(n) + 1.0) * q);
  if (rank > static_cast<double>(n)) return ess_sup;
  std::sort(values.begin(), values.end());
  return values[static_cast<std::size_t>(rank) - 1];
}

// Exhaustive-enumeration marginals of a grid MRF (small instances only).
inline uqband::bp::Marginals enumerate_marginals(const uqband::bp::MrfModel &model) {
  const int pixels = model.height * model.width;
  const int count = model.labels.count();
  std::vector<int> labels(pixels, 0);
  uqband::bp::Marginals marg;
  marg.height = model.height;
  marg.width = model.width;
  marg.label_count = count;
  marg.p.assign(static_cast<std::size_t>(pixels) * count, 0.0);

  double total = 0.0;
  while (true) {
    double energy = 0.0;
    for (int pix = 0; pix < pixels; ++pix) energy += model.unary_at(pix, labels[pix]);
    for (int i = 0; i < model.height; ++i)
      for (int j = 0; j < model.width; ++j) {
        const int pix = i * model.width + j;
        if (j + 1 < model.width)
          energy += model.pairwise_weight * std::abs(model.labels.values[labels[pix]] -
                                                     model.labels.values[labels[pix + 1]]);
        if (i + 1 < model.height)
          energy += model.pairwise_weight *
                    std::abs(model.labels.values[labels[pix]] -
                             model.labels.values[labels[pix + model.width]]);
      }
    const double w = std::exp(-energy);
    total += w;
    for (int pix = 0; pix < pixels; ++pix)
      marg.p[static_cast<std::size_t>(pix) * count + labels[pix]] += w;

    int carry = 0;
    while (carry < pixels && ++labels[carry] == count) labels[carry++] = 0;
    if (carry == pixels) break;
  }
  for (double &v : marg.p) v /= total;
  return marg;
}

// Mixture posterior mean/variance by dense quadrature of x p(x|z).
inline std::pair<double, double> quadrature_posterior_moments(
    const std::vector<double> &centers, const std::vector<double> &vars,
    const std::vector<double> &weights, double noise_var, double z, int points = 10000) {
  double lo = centers.front(), hi = centers.front();
  for (double c : centers) {
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  double smax = 0.0;
  for (double v : vars) smax = std::max(smax, std::sqrt(v));
  lo = std::min(lo, z) - 10.0 * (smax + std::sqrt(noise_var));
  hi = std::max(hi, z) + 10.0 * (smax + std::sqrt(noise_var));

  auto unnormalized = [&](double x) {
    double p = 0.0;
    for (std::size_t k = 0; k < centers.size(); ++k)
      p += weights[k] / std::sqrt(vars[k]) *
           std::exp(-0.5 * (x - centers[k]) * (x - centers[k]) / vars[k]);
    return p * std::exp(-0.5 * (z - x) * (z - x) / noise_var);
  };

  const double dx = (hi - lo) / points;
  double mass = 0.0, first = 0.0, second = 0.0;
  for (int i = 0; i <= points; ++i) {
    const double x = lo + i * dx;
    const double w = (i == 0 || i == points) ? 0.5 : 1.0;
    const double p = w * unnormalized(x);
    mass += p;
    first += p * x;
    second += p * x * x;
  }
  const double mean = first / mass;
  return {mean, second / mass - mean * mean};
}

}  // namespace oracles
