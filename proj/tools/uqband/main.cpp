#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "commands.hpp"
#include "config.hpp"

namespace {

using namespace uqband;
using namespace uqband::cli;

// Shared flags that override config-file values.
struct CommonFlags {
  std::string config_path;
  std::vector<std::string> overrides;  // raw key=value pairs
  long seed = -1;
  int workers = 0;
  std::vector<double> q_levels;
  std::string pooling;
};

void add_common(CLI::App *cmd, CommonFlags &flags) {
  cmd->add_option("--config", flags.config_path, "key=value config file");
  cmd->add_option("--set", flags.overrides, "extra key=value override (repeatable)");
  cmd->add_option("--seed", flags.seed, "seed override");
  cmd->add_option("--workers", flags.workers, "worker pool size");
  cmd->add_option("--q", flags.q_levels, "quantile level (repeatable)");
  cmd->add_option("--pooling", flags.pooling, "joint|separate");
}

ExperimentConfig resolve_config(const CommonFlags &flags) {
  ExperimentConfig cfg;
  if (!flags.config_path.empty()) cfg = ExperimentConfig::load(flags.config_path);
  for (const auto &kv : flags.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (flags.seed >= 0) cfg.seed = static_cast<std::uint64_t>(flags.seed);
  if (flags.workers > 0) cfg.workers = flags.workers;
  if (!flags.q_levels.empty()) cfg.q_levels = flags.q_levels;
  if (!flags.pooling.empty()) cfg.set("pooling", flags.pooling);
  return cfg;
}

int run(int argc, char **argv) {
  CLI::App app{"pixel-wise reconstruction-error quantiles with conformal coverage "
               "guarantees for Bayesian imaging"};
  app.require_subcommand(1);

  // corrupt
  auto *corrupt = app.add_subcommand("corrupt", "add seeded Gaussian noise to images");
  CorruptOptions corrupt_opt;
  std::vector<std::string> corrupt_inputs;
  corrupt->add_option("images", corrupt_inputs, "input images (.pgm or .cif)")->required();
  corrupt->add_option("--out-dir", corrupt_opt.out_dir, "output directory")->required();
  corrupt->add_option("--sigma", corrupt_opt.sigma, "noise standard deviation");
  long corrupt_seed = 0;
  corrupt->add_option("--seed", corrupt_seed, "noise seed");
  corrupt->add_flag("--pgm", corrupt_opt.pgm_preview, "also write 8-bit PGM previews");

  // calibrate
  auto *calibrate = app.add_subcommand(
      "calibrate", "sample posteriors on paired data and build quantile tables");
  CommonFlags calibrate_flags;
  add_common(calibrate, calibrate_flags);
  std::vector<std::string> calibrate_truth, calibrate_obs;
  fs::path calibrate_out;
  calibrate->add_option("--truth", calibrate_truth, "ground-truth images")->required();
  calibrate->add_option("--obs", calibrate_obs, "paired observations")->required();
  calibrate->add_option("--out-dir", calibrate_out, "output directory")->required();

  // predict
  auto *predict = app.add_subcommand(
      "predict", "sample the posterior of new observations and look up error quantiles");
  CommonFlags predict_flags;
  add_common(predict, predict_flags);
  std::vector<std::string> predict_tables, predict_obs;
  fs::path predict_out;
  predict->add_option("--table", predict_tables, "quantile table CSV (repeatable)")->required();
  predict->add_option("--obs", predict_obs, "observations")->required();
  predict->add_option("--out-dir", predict_out, "output directory")->required();

  // evaluate
  auto *evaluate = app.add_subcommand("evaluate", "score predictions against ground truth");
  CommonFlags evaluate_flags;
  add_common(evaluate, evaluate_flags);
  std::vector<std::string> evaluate_truth;
  fs::path evaluate_pred, evaluate_out;
  evaluate->add_option("--truth", evaluate_truth, "ground-truth images")->required();
  evaluate->add_option("--pred-dir", evaluate_pred, "directory with predict outputs")
      ->required();
  evaluate->add_option("--out", evaluate_out, "metrics CSV path")->required();

  // bp-compare
  auto *bpc = app.add_subcommand(
      "bp-compare", "belief-propagation reference versus chain estimates over samples");
  CommonFlags bpc_flags;
  add_common(bpc, bpc_flags);
  BpCompareOptions bpc_opt;
  std::string bpc_obs;
  bpc->add_option("--obs", bpc_obs, "observation image")->required();
  bpc->add_option("--out", bpc_opt.out_csv, "convergence CSV path")->required();
  bpc->add_flag("--dump-marginals", bpc_opt.dump_marginals,
                "write one raw grid per label next to the CSV");
  bpc->add_option("--marginal-slice", bpc_opt.marginal_slice_row,
                  "write a pixel-marginal CSV slice for this row");

  // thinning-study
  auto *thin = app.add_subcommand("thinning-study",
                                  "bp-compare repeated over thinning factors");
  CommonFlags thin_flags;
  add_common(thin, thin_flags);
  ThinningStudyOptions thin_opt;
  std::string thin_obs;
  thin->add_option("--obs", thin_obs, "observation image")->required();
  thin->add_option("--out", thin_opt.out_csv, "CSV path")->required();
  thin->add_option("--H", thin_opt.thinnings, "thinning factors (repeatable)");

  // toy
  auto *toy = app.add_subcommand("toy", "analytic scalar mixture pipeline check");
  ToyOptions toy_opt;
  std::vector<double> toy_centers, toy_vars, toy_weights;
  double toy_noise_var = -1.0;
  long toy_seed = 0;
  toy->add_option("--m", toy_opt.m, "calibration sample size");
  toy->add_option("--n", toy_opt.n, "test sample size");
  toy->add_option("--q", toy_opt.q_levels, "quantile level (repeatable)");
  toy->add_option("--bins", toy_opt.bins, "interior variance bins");
  toy->add_option("--ess-sup", toy_opt.ess_sup, "essential supremum fallback");
  toy->add_option("--seed", toy_seed, "sampling seed");
  toy->add_option("--center", toy_centers, "mixture center (repeatable)");
  toy->add_option("--var", toy_vars, "mixture component variance (repeatable)");
  toy->add_option("--weight", toy_weights, "mixture weight (repeatable)");
  toy->add_option("--noise-var", toy_noise_var, "observation noise variance");
  toy->add_option("--density-grid", toy_opt.density_grid, "density dump resolution");
  toy->add_option("--out-dir", toy_opt.out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (corrupt->parsed()) {
    corrupt_opt.inputs.assign(corrupt_inputs.begin(), corrupt_inputs.end());
    corrupt_opt.seed = static_cast<std::uint64_t>(corrupt_seed);
    cmd_corrupt(corrupt_opt);
  } else if (calibrate->parsed()) {
    CalibrateOptions opt;
    opt.config = resolve_config(calibrate_flags);
    opt.truth.assign(calibrate_truth.begin(), calibrate_truth.end());
    opt.observations.assign(calibrate_obs.begin(), calibrate_obs.end());
    opt.out_dir = calibrate_out;
    cmd_calibrate(opt);
  } else if (predict->parsed()) {
    PredictOptions opt;
    opt.config = resolve_config(predict_flags);
    opt.tables.assign(predict_tables.begin(), predict_tables.end());
    opt.observations.assign(predict_obs.begin(), predict_obs.end());
    opt.out_dir = predict_out;
    cmd_predict(opt);
  } else if (evaluate->parsed()) {
    EvaluateOptions opt;
    opt.config = resolve_config(evaluate_flags);
    opt.truth.assign(evaluate_truth.begin(), evaluate_truth.end());
    opt.pred_dir = evaluate_pred;
    opt.out_csv = evaluate_out;
    cmd_evaluate(opt);
  } else if (bpc->parsed()) {
    bpc_opt.config = resolve_config(bpc_flags);
    bpc_opt.observation = bpc_obs;
    cmd_bp_compare(bpc_opt);
  } else if (thin->parsed()) {
    thin_opt.config = resolve_config(thin_flags);
    thin_opt.observation = thin_obs;
    cmd_thinning_study(thin_opt);
  } else if (toy->parsed()) {
    if (!toy_centers.empty() || !toy_vars.empty() || !toy_weights.empty() ||
        toy_noise_var > 0.0) {
      if (toy_centers.empty() || toy_centers.size() != toy_vars.size() ||
          toy_centers.size() != toy_weights.size() || toy_noise_var <= 0.0)
        throw ConfigError("toy: --center/--var/--weight must repeat together and "
                          "--noise-var must be positive");
      toy_opt.spec.centers = toy_centers;
      toy_opt.spec.component_vars = toy_vars;
      toy_opt.spec.weights = toy_weights;
      toy_opt.spec.noise_var = toy_noise_var;
    }
    toy_opt.seed = static_cast<std::uint64_t>(toy_seed);
    cmd_toy(toy_opt);
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  try {
    return run(argc, argv);
  } catch (const DivergenceError &e) {
    std::fprintf(stderr, "divergence error: %s\n", e.what());
    return 3;
  } catch (const IoError &e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 4;
  } catch (const ConfigError &e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ShapeError &e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const DomainError &e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const StatError &e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
