#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "oracles.hpp"
#include "uqband/priors.hpp"
#include "uqband/rng.hpp"

using namespace uqband;

namespace {

ImageGrid random_grid(int h, int w, std::uint64_t seed, double scale = 1.0) {
  NormalSampler rng(seed);
  ImageGrid g(h, w);
  for (auto &v : g.data()) v = scale * rng();
  return g;
}

StackedField random_field(int h, int w, std::uint64_t seed) {
  NormalSampler rng(seed);
  StackedField f(h, w);
  for (auto &v : f.v) v = rng();
  return f;
}

}  // namespace

TEST_CASE("apply_D on a constant image is zero") {
  DiffOperator op(5, 7);
  const StackedField d = op.apply(ImageGrid(5, 7, 0.42));
  for (double v : d.v) CHECK(v == 0.0);
}

TEST_CASE("apply_D stencil on the 2x2 two-jump image") {
  DiffOperator op(2, 2);
  const StackedField d = op.apply(ImageGrid::from_data(2, 2, {0, 1, 0, 1}));
  // vertical channel all zeros
  CHECK(d.at(0, 0, 0) == 0.0);
  CHECK(d.at(0, 1, 0) == 0.0);
  CHECK(d.at(1, 0, 0) == 0.0);
  CHECK(d.at(1, 1, 0) == 0.0);
  // horizontal channel: unit jump inside, zero at the boundary column
  CHECK(d.at(0, 0, 1) == 1.0);
  CHECK(d.at(0, 1, 1) == 0.0);
  CHECK(d.at(1, 0, 1) == 1.0);
  CHECK(d.at(1, 1, 1) == 0.0);
}

TEST_CASE("D and its adjoint satisfy the pairing identity") {
  for (int h = 2; h <= 16; ++h) {
    for (int w = 2; w <= 16; ++w) {
      DiffOperator op(h, w);
      const ImageGrid x = random_grid(h, w, 100 + h * 31 + w);
      const StackedField p = random_field(h, w, 200 + h + w * 17);
      const StackedField dx = op.apply(x);
      const ImageGrid dtp = op.apply_adjoint(p);
      double lhs = 0.0;
      for (std::size_t k = 0; k < dx.size(); ++k) lhs += dx.v[k] * p.v[k];
      double rhs = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) rhs += x[k] * dtp[k];
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  }
}

TEST_CASE("tv energy examples and brute-force oracle") {
  CHECK(tv_energy(ImageGrid(3, 4, 0.9)) == 0.0);
  CHECK(tv_energy(ImageGrid::from_data(2, 2, {0, 1, 0, 1})) == doctest::Approx(2.0));

  const ImageGrid x = random_grid(8, 8, 5);
  double brute = 0.0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      if (i < 7) brute += std::abs(x.at(i + 1, j) - x.at(i, j));
      if (j < 7) brute += std::abs(x.at(i, j + 1) - x.at(i, j));
    }
  CHECK(tv_energy(x) == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("tv energy is shift invariant") {
  const ImageGrid x = random_grid(6, 6, 8);
  ImageGrid shifted = x;
  for (auto &v : shifted.data()) v += 3.7;
  CHECK(tv_energy(shifted) == doctest::Approx(tv_energy(x)).epsilon(1e-10));
}

TEST_CASE("huber tv gradient vanishes on constants and saturates for large jumps") {
  const ImageGrid flat(4, 4, 0.3);
  const ImageGrid gflat = huber_tv_gradient(flat, 0.01);
  for (double v : gflat.data()) CHECK(v == 0.0);

  // |Dx| >> delta: each pixel's gradient is a +-1 stencil sum, bounded by 4.
  ImageGrid ramp(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) ramp.at(i, j) = 10.0 * (i + j);
  const ImageGrid g = huber_tv_gradient(ramp, 0.01);
  for (double v : g.data()) CHECK(std::abs(v) <= 4.0 + 1e-12);
}

TEST_CASE("huber tv gradient matches finite differences") {
  const double delta = 0.01;
  const ImageGrid x = random_grid(8, 8, 77, 0.5);
  const ImageGrid fd = oracles::fd_gradient(
      [&](const ImageGrid &u) { return huber_tv_energy(u, delta); }, x);
  CHECK(oracles::rel_error(huber_tv_gradient(x, delta), fd) < 1e-5);
}

TEST_CASE("huber gradient lipschitz bound is exposed as L^2/delta") {
  HuberTvPrior prior(0.02);
  CHECK(prior.gradient_lipschitz() == doctest::Approx(8.0 / 0.02));
}

TEST_CASE("l1 dual prox projects onto the weight box") {
  const double lambda = 4.0;
  const double w = 1.0 / lambda;

  StackedField inside(2, 2);
  for (auto &v : inside.v) v = 0.1;  // within [-0.25, 0.25]
  const StackedField same = l1_dual_prox(inside, 0.3, w);
  for (double v : same.v) CHECK(v == 0.1);

  StackedField big(2, 2);
  for (auto &v : big.v) v = 10.0 / lambda;
  const StackedField clamped = l1_dual_prox(big, 0.3, w);
  for (double v : clamped.v) CHECK(v == w);
}

TEST_CASE("l1 dual prox agrees with a 1d grid-search argmin") {
  // prox of sigma f* with f* the indicator of [-w, w]: minimize
  // 1/2 (q - p)^2 over the box.
  const double w = 0.4;
  NormalSampler rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const double p = 2.0 * rng();
    StackedField f(1, 1);
    f.v[0] = p;
    const double got = l1_dual_prox(f, 0.7, w).v[0];

    double best = -w, best_val = 1e300;
    for (int i = 0; i <= 100000; ++i) {
      const double q = -w + 2.0 * w * i / 100000.0;
      const double val = 0.5 * (q - p) * (q - p);
      if (val < best_val) {
        best_val = val;
        best = q;
      }
    }
    CHECK(got == doctest::Approx(best).epsilon(1e-4));
  }
}

TEST_CASE("foe energy and gradient at zero") {
  const FoESpec spec = default_foe_spec();
  const ImageGrid zero(6, 6, 0.0);
  CHECK(foe_energy(spec, zero) == 0.0);
  const ImageGrid gzero = foe_gradient(spec, zero);
  for (double v : gzero.data()) CHECK(v == 0.0);
}

TEST_CASE("foe with the identity stencil degenerates to a pointwise energy") {
  FoESpec spec;
  ImageGrid k(1, 1, 1.0);
  spec.kernels.push_back(k);
  spec.alphas.push_back(1.0);
  const ImageGrid x = random_grid(5, 5, 12, 0.7);
  double expected = 0.0;
  for (double v : x.data()) expected += std::log1p(v * v);
  CHECK(foe_energy(spec, x) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("foe gradient matches finite differences") {
  const FoESpec spec = default_foe_spec();
  const ImageGrid x = random_grid(8, 8, 13, 0.4);
  const ImageGrid fd =
      oracles::fd_gradient([&](const ImageGrid &u) { return foe_energy(spec, u); }, x);
  CHECK(oracles::rel_error(foe_gradient(spec, x), fd) < 1e-5);
}

TEST_CASE("foe energy is nonnegative and zero only for zero responses") {
  const FoESpec spec = default_foe_spec();
  for (int trial = 0; trial < 10; ++trial) {
    const ImageGrid x = random_grid(6, 6, 500 + trial, 0.3);
    CHECK(foe_energy(spec, x) >= 0.0);
  }
  // constant image: every DCT filter without DC has zero response
  CHECK(foe_energy(spec, ImageGrid(6, 6, 0.77)) == doctest::Approx(0.0).epsilon(1e-20));
}

TEST_CASE("foe rejects kernels larger than the image") {
  const FoESpec spec = default_foe_spec();
  CHECK_THROWS_AS(foe_energy(spec, ImageGrid(2, 2, 0.0)), ConfigError);
}

TEST_CASE("foe kernel csv round trip") {
  const FoESpec spec = default_foe_spec();
  const auto path = std::filesystem::temp_directory_path() / "uqband_foe.csv";
  save_foe_csv(spec, path);
  const FoESpec back = load_foe_csv(path);
  REQUIRE(back.kernels.size() == spec.kernels.size());
  for (std::size_t c = 0; c < spec.kernels.size(); ++c) {
    CHECK(back.alphas[c] == spec.alphas[c]);
    for (std::size_t k = 0; k < spec.kernels[c].size(); ++k)
      CHECK(back.kernels[c][k] == spec.kernels[c][k]);
  }
  std::filesystem::remove(path);
}

TEST_CASE("all differentiable prior gradients pass a coarse fd sweep") {
  // The acceptance suite runs the tight 50-grid sweep; this is the quick
  // per-module version.
  for (int trial = 0; trial < 5; ++trial) {
    const ImageGrid x = random_grid(8, 8, 900 + trial, 0.5);
    HuberTvPrior huber(0.05);
    FoEPrior foe(default_foe_spec());
    for (const Prior *prior : {static_cast<const Prior *>(&huber), static_cast<const Prior *>(&foe)}) {
      const ImageGrid fd = oracles::fd_gradient(
          [&](const ImageGrid &u) { return prior->energy(u); }, x);
      CHECK(oracles::rel_error(prior->gradient(x), fd) < 1e-4);
    }
  }
}
