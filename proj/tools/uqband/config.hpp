#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "uqband/conformal.hpp"
#include "uqband/model.hpp"
#include "uqband/samplers.hpp"

namespace uqband::cli {

enum class PriorKind { tv, huber_tv, foe };
enum class SamplerKind { ula, ulpda, pula };
enum class PoolingMode { joint, separate };

/// Flat experiment configuration. Values come from a key=value config file
/// overridden by CLI flags; everything is validated up front, before any
/// file is touched.
struct ExperimentConfig {
  PriorKind prior = PriorKind::tv;
  SamplerKind sampler = SamplerKind::ulpda;
  double sigma = 15.0 / 255.0;  // noise level
  double lambda = 0.1;          // prior weight is 1/lambda
  double tau = 5e-5;            // primal/gradient step
  double sigma_dual = 0.0;      // 0 = auto 1/(tau L^2)
  double theta = 1.0;
  long iterations = 20000;
  long burn_in = 0;
  long thinning = 1;
  double huber_delta = 0.01;
  std::string foe_kernels;  // CSV path; empty = built-in DCT bank
  int labels = 256;         // BP label subdivisions
  int bp_iterations = 10;
  std::vector<double> q_levels = {0.9};
  int bins = 25;  // interior variance bins; 1 = single catch-all bin
  double ess_sup = 1.0;
  std::uint64_t seed = 0;
  PoolingMode pooling = PoolingMode::joint;
  int workers = 1;
  bool diagnostics = false;
  long diag_stride = 100;

  /// Parse a key=value file ('#' starts a comment). Unknown keys are errors.
  static ExperimentConfig load(const std::filesystem::path &path);
  void set(const std::string &key, const std::string &value);
  void validate() const;

  /// Canonical sorted key=value serialization (drives the provenance hash).
  std::string canonical() const;
  /// FNV-1a 64 over the canonical form, as 16 hex digits.
  std::string hash() const;

  std::shared_ptr<const Prior> make_prior() const;
  PosteriorModel make_model(const ImageGrid &observation) const;
  /// Run the configured sampler on one observation.
  ChainStats run_chain(const ImageGrid &observation, std::uint64_t chain_seed,
                       const ChainObserver &observer = nullptr) const;
  conformal::BinningScheme make_bins(
      std::span<const conformal::CalibrationRecord> records) const;
};

std::string to_string(PriorKind k);
std::string to_string(SamplerKind k);
std::string to_string(PoolingMode m);

}  // namespace uqband::cli
