#include <benchmark/benchmark.h>

#include <memory>

#include "uqband/bp.hpp"
#include "uqband/conformal.hpp"
#include "uqband/priors.hpp"
#include "uqband/rng.hpp"
#include "uqband/samplers.hpp"

namespace {

using namespace uqband;

ImageGrid random_grid(int h, int w, std::uint64_t seed) {
  NormalSampler rng(seed);
  ImageGrid g(h, w);
  for (auto &v : g.data()) v = 0.5 + 0.1 * rng();
  return g;
}

void BM_DiffApply(benchmark::State &state) {
  const int n = static_cast<int>(state.range(0));
  const ImageGrid x = random_grid(n, n, 1);
  const DiffOperator op(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(op.apply(x));
}
BENCHMARK(BM_DiffApply)->Arg(64)->Arg(256);

void BM_HuberGradient(benchmark::State &state) {
  const int n = static_cast<int>(state.range(0));
  const ImageGrid x = random_grid(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(huber_tv_gradient(x, 0.01));
}
BENCHMARK(BM_HuberGradient)->Arg(64)->Arg(256);

void BM_FoEGradient(benchmark::State &state) {
  const int n = static_cast<int>(state.range(0));
  const ImageGrid x = random_grid(n, n, 3);
  const FoESpec spec = default_foe_spec();
  for (auto _ : state) benchmark::DoNotOptimize(foe_gradient(spec, x));
}
BENCHMARK(BM_FoEGradient)->Arg(64);

void BM_UlpdaChain(benchmark::State &state) {
  const ImageGrid z = random_grid(64, 64, 4);
  PosteriorModel model{GaussianLikelihood(15.0 / 255.0, z), std::make_shared<TvPrior>(), 0.1};
  UlpdaConfig cfg;
  cfg.tau = 5e-5;
  cfg.iterations = static_cast<long>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ulpda_run(model, cfg));
}
BENCHMARK(BM_UlpdaChain)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_BpSweepIteration(benchmark::State &state) {
  const ImageGrid z = random_grid(16, 16, 5);
  const auto labels = bp::LabelSpace::subdivisions(static_cast<int>(state.range(0)));
  const auto model = bp::MrfModel::tv_denoising(z, 15.0 / 255.0, 0.1, labels);
  for (auto _ : state) benchmark::DoNotOptimize(bp::bp_sweep(model, 1));
}
BENCHMARK(BM_BpSweepIteration)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_BuildTable(benchmark::State &state) {
  NormalSampler rng(6);
  std::vector<conformal::CalibrationRecord> records(100000);
  for (auto &r : records) {
    const double t = std::exp(-8.0 + 4.0 * rng.uniform());
    r = {t * std::exp(rng()), t};
  }
  const auto bins = conformal::BinningScheme::for_records(records, 25);
  for (auto _ : state)
    benchmark::DoNotOptimize(conformal::build_table(records, bins, 0.9, 1.0));
}
BENCHMARK(BM_BuildTable);

void BM_WelfordUpdate(benchmark::State &state) {
  const ImageGrid x = random_grid(64, 64, 7);
  ChainStats stats(64, 64);
  for (auto _ : state) {
    stats.update(x);
    benchmark::DoNotOptimize(stats.mean[0]);
  }
}
BENCHMARK(BM_WelfordUpdate);

}  // namespace

BENCHMARK_MAIN();
