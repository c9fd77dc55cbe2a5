#pragma once

#include <filesystem>
#include <vector>

#include "config.hpp"
#include "uqband/toy1d.hpp"

namespace uqband::cli {

namespace fs = std::filesystem;

struct CorruptOptions {
  std::vector<fs::path> inputs;
  fs::path out_dir;
  double sigma = 15.0 / 255.0;
  std::uint64_t seed = 0;
  bool pgm_preview = false;
};
void cmd_corrupt(const CorruptOptions &opt);

struct CalibrateOptions {
  ExperimentConfig config;
  std::vector<fs::path> truth;
  std::vector<fs::path> observations;
  fs::path out_dir;
};
void cmd_calibrate(const CalibrateOptions &opt);

struct PredictOptions {
  ExperimentConfig config;
  std::vector<fs::path> tables;
  std::vector<fs::path> observations;
  fs::path out_dir;
};
void cmd_predict(const PredictOptions &opt);

struct EvaluateOptions {
  ExperimentConfig config;  // provenance + q levels
  std::vector<fs::path> truth;
  fs::path pred_dir;
  fs::path out_csv;
};
void cmd_evaluate(const EvaluateOptions &opt);

struct BpCompareOptions {
  ExperimentConfig config;
  fs::path observation;
  fs::path out_csv;
  bool dump_marginals = false;  // one raw grid per label, heavy
  int marginal_slice_row = -1;  // CSV slice of pixel marginals for one row
};
void cmd_bp_compare(const BpCompareOptions &opt);

struct ThinningStudyOptions {
  ExperimentConfig config;
  fs::path observation;
  std::vector<long> thinnings = {1, 5, 10};
  fs::path out_csv;
};
void cmd_thinning_study(const ThinningStudyOptions &opt);

struct ToyOptions {
  toy1d::MixtureSpec spec = toy1d::MixtureSpec::default_spec();
  long m = 200000;
  long n = 10000;
  std::vector<double> q_levels = {0.9};
  int bins = 25;
  double ess_sup = 25.0;
  std::uint64_t seed = 0;
  int density_grid = 64;
  fs::path out_dir;
};
void cmd_toy(const ToyOptions &opt);

// Per-pixel tables for pixel-separate pooling, stored in one CSV.
struct SeparateTableSet {
  int height = 0;
  int width = 0;
  std::vector<conformal::QuantileTable> tables;  // one per pixel, row-major
};

/// Reads either a joint table (core CSV format) or a separate-table set.
struct LoadedTable {
  bool separate = false;
  conformal::QuantileTable joint;
  SeparateTableSet per_pixel;
  double q() const { return separate ? per_pixel.tables.front().q : joint.q; }
};
LoadedTable load_any_table(const fs::path &path);

}  // namespace uqband::cli
