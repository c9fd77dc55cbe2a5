#pragma once

#include <filesystem>
#include <vector>

#include "uqband/image.hpp"
#include "uqband/model.hpp"

namespace uqband {

/// Two-channel field over an MxN grid: channel 0 holds vertical (row)
/// differences, channel 1 horizontal (column) differences.
struct StackedField {
  int height = 0;
  int width = 0;
  std::vector<double> v;  // size 2*height*width, channel-major

  StackedField() = default;
  StackedField(int h, int w) : height(h), width(w), v(2 * static_cast<std::size_t>(h) * w, 0.0) {}

  double &at(int i, int j, int c) {
    return v[static_cast<std::size_t>(c) * height * width + static_cast<std::size_t>(i) * width + j];
  }
  double at(int i, int j, int c) const {
    return v[static_cast<std::size_t>(c) * height * width + static_cast<std::size_t>(i) * width + j];
  }
  std::size_t size() const { return v.size(); }
};

/// Forward-difference operator D with zero rows at the bottom/right boundary:
///   (Dx)_{i,j,0} = x_{i+1,j} - x_{i,j}  (i < M-1, else 0)
///   (Dx)_{i,j,1} = x_{i,j+1} - x_{i,j}  (j < N-1, else 0)
/// The squared operator norm is bounded by 8 for this stencil.
struct DiffOperator {
  int height = 0;
  int width = 0;

  static constexpr double norm_bound_sq = 8.0;  // L^2 with L = ||D||

  DiffOperator(int h, int w) : height(h), width(w) {}

  StackedField apply(const ImageGrid &x) const;
  ImageGrid apply_adjoint(const StackedField &p) const;
};

/// Anisotropic total variation ||Dx||_1.
double tv_energy(const ImageGrid &x);

/// Huber smoothing of the absolute value: t^2/(2 delta) for |t| <= delta,
/// |t| - delta/2 otherwise. Energy sums the smoothed channel magnitudes of Dx.
double huber_tv_energy(const ImageGrid &x, double delta);

/// Gradient D^T clip(Dx/delta, -1, 1); Lipschitz constant <= 8/delta.
ImageGrid huber_tv_gradient(const ImageGrid &x, double delta);

/// prox of step * f^* for f = weight*||.||_1: pointwise projection onto
/// [-weight, weight]. Independent of step because f^* is an indicator.
StackedField l1_dual_prox(const StackedField &p, double step, double weight);

/// Fields-of-Experts energy with fixed filters: sum_c alpha_c sum_ij
/// log(1 + ((k_c * x)_ij)^2). Filtering uses symmetric (reflect) boundary
/// padding without repeating the edge pixel.
struct FoESpec {
  std::vector<ImageGrid> kernels;
  std::vector<double> alphas;

  void validate() const;
};

/// 3x3 DCT-II basis stencils minus the DC filter (8 kernels), alpha_c = 1.
FoESpec default_foe_spec();

/// CSV: one row per kernel, first value alpha_c then row-major stencil
/// weights; the kernel side is the square root of the remaining count.
FoESpec load_foe_csv(const std::filesystem::path &path);
void save_foe_csv(const FoESpec &spec, const std::filesystem::path &path);

double foe_energy(const FoESpec &spec, const ImageGrid &x);
ImageGrid foe_gradient(const FoESpec &spec, const ImageGrid &x);

// Prior handles for PosteriorModel.

class TvPrior : public Prior {
 public:
  std::string name() const override { return "tv"; }
  double energy(const ImageGrid &x) const override { return tv_energy(x); }
  bool differentiable() const override { return false; }
};

class HuberTvPrior : public Prior {
 public:
  explicit HuberTvPrior(double delta);
  std::string name() const override { return "huber_tv"; }
  double energy(const ImageGrid &x) const override { return huber_tv_energy(x, delta_); }
  bool differentiable() const override { return true; }
  ImageGrid gradient(const ImageGrid &x) const override { return huber_tv_gradient(x, delta_); }
  double gradient_lipschitz() const override { return DiffOperator::norm_bound_sq / delta_; }
  double delta() const { return delta_; }

 private:
  double delta_;
};

class FoEPrior : public Prior {
 public:
  explicit FoEPrior(FoESpec spec);
  std::string name() const override { return "foe"; }
  double energy(const ImageGrid &x) const override { return foe_energy(spec_, x); }
  bool differentiable() const override { return true; }
  ImageGrid gradient(const ImageGrid &x) const override { return foe_gradient(spec_, x); }
  double gradient_lipschitz() const override { return lipschitz_; }
  const FoESpec &spec() const { return spec_; }

 private:
  FoESpec spec_;
  double lipschitz_;
};

}  // namespace uqband
