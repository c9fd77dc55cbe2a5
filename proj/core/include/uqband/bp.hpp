#pragma once

#include <utility>
#include <vector>

#include "uqband/image.hpp"
#include "uqband/samplers.hpp"

namespace uqband::bp {

/// Discretized gray scale label set l_k = k/L, k = 0..L (so count = L+1).
struct LabelSpace {
  std::vector<double> values;

  /// L subdivisions of [0,1]: L+1 equispaced labels.
  static LabelSpace subdivisions(int l);
  /// count equispaced labels in [0,1] (count >= 2).
  static LabelSpace with_count(int count);

  int count() const { return static_cast<int>(values.size()); }
  double spacing() const { return values.size() > 1 ? values[1] - values[0] : 0.0; }
};

/// Pairwise MRF over the 4-connected pixel grid:
///   -log P(x) = sum_v g_v(x_v) + w sum_{(v,v') in E} |x_v - x_v'| + const.
/// Unaries are stored per pixel as a dense table over labels.
struct MrfModel {
  int height = 0;
  int width = 0;
  LabelSpace labels;
  std::vector<double> unary;  // (height*width) x count, pixel-major
  double pairwise_weight = 0.0;  // 1/lambda

  double unary_at(int pix, int label) const {
    return unary[static_cast<std::size_t>(pix) * labels.count() + label];
  }

  /// TV-l2 denoising model: g_v(l) = (l - z_v)^2 / (2 sigma^2),
  /// f(l,l') = |l - l'| / lambda.
  static MrfModel tv_denoising(const ImageGrid &z, double sigma, double lambda,
                               LabelSpace labels);
};

/// Per-pixel label distributions; each row is nonnegative and sums to 1.
struct Marginals {
  int height = 0;
  int width = 0;
  int label_count = 0;
  std::vector<double> p;  // (height*width) x label_count

  double at(int pix, int label) const {
    return p[static_cast<std::size_t>(pix) * label_count + label];
  }
};

/// Sum-product sweep BP in the log domain. One iteration performs four
/// raster sweeps (left-to-right, right-to-left, top-to-bottom,
/// bottom-to-top), each updating the directed messages along its direction
/// in place; messages are max-shift normalized. damping in [0,1) blends the
/// previous message in (0 = off).
Marginals bp_sweep(const MrfModel &model, int iterations, double damping = 0.0);

/// Expectation and variance of each pixel's discrete marginal.
std::pair<ImageGrid, ImageGrid> bp_moments(const Marginals &marg, const LabelSpace &labels);

/// Mean absolute difference of the BP maps against a chain's estimates:
/// (MD of means, MD of variances).
std::pair<double, double> compare_to_chain(const ImageGrid &bp_mean, const ImageGrid &bp_var,
                                           const ChainStats &chain);

/// P[X_pix = l_k] as one grid per label (for raw-grid export).
ImageGrid marginal_slice(const Marginals &marg, int label);

}  // namespace uqband::bp
