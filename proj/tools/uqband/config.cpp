#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "uqband/priors.hpp"

namespace uqband::cli {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string &s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string &key, const std::string &value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception &) {
    throw ConfigError("config key '" + key + "': bad number '" + value + "'");
  }
}

long parse_long(const std::string &key, const std::string &value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception &) {
    throw ConfigError("config key '" + key + "': bad integer '" + value + "'");
  }
}

}  // namespace

std::string to_string(PriorKind k) {
  switch (k) {
    case PriorKind::tv: return "tv";
    case PriorKind::huber_tv: return "huber_tv";
    case PriorKind::foe: return "foe";
  }
  return "?";
}

std::string to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::ula: return "ula";
    case SamplerKind::ulpda: return "ulpda";
    case SamplerKind::pula: return "pula";
  }
  return "?";
}

std::string to_string(PoolingMode m) {
  return m == PoolingMode::joint ? "joint" : "separate";
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  ExperimentConfig cfg;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config " + path.string() + ":" + std::to_string(lineno) +
                        ": expected key=value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void ExperimentConfig::set(const std::string &key, const std::string &value) {
  if (key == "prior") {
    if (value == "tv") prior = PriorKind::tv;
    else if (value == "huber_tv") prior = PriorKind::huber_tv;
    else if (value == "foe") prior = PriorKind::foe;
    else throw ConfigError("prior must be tv|huber_tv|foe, got '" + value + "'");
  } else if (key == "sampler") {
    if (value == "ula") sampler = SamplerKind::ula;
    else if (value == "ulpda") sampler = SamplerKind::ulpda;
    else if (value == "pula") sampler = SamplerKind::pula;
    else throw ConfigError("sampler must be ula|ulpda|pula, got '" + value + "'");
  } else if (key == "pooling") {
    if (value == "joint") pooling = PoolingMode::joint;
    else if (value == "separate") pooling = PoolingMode::separate;
    else throw ConfigError("pooling must be joint|separate, got '" + value + "'");
  } else if (key == "sigma") {
    sigma = parse_double(key, value);
  } else if (key == "lambda") {
    lambda = parse_double(key, value);
  } else if (key == "tau") {
    tau = parse_double(key, value);
  } else if (key == "sigma_dual") {
    sigma_dual = parse_double(key, value);
  } else if (key == "theta") {
    theta = parse_double(key, value);
  } else if (key == "iterations") {
    iterations = parse_long(key, value);
  } else if (key == "burn_in") {
    burn_in = parse_long(key, value);
  } else if (key == "thinning") {
    thinning = parse_long(key, value);
  } else if (key == "huber_delta") {
    huber_delta = parse_double(key, value);
  } else if (key == "foe_kernels") {
    foe_kernels = value;
  } else if (key == "labels") {
    labels = static_cast<int>(parse_long(key, value));
  } else if (key == "bp_iterations") {
    bp_iterations = static_cast<int>(parse_long(key, value));
  } else if (key == "q") {
    q_levels.clear();
    std::stringstream ss(value);
    std::string cell;
    while (std::getline(ss, cell, ',')) q_levels.push_back(parse_double(key, trim(cell)));
  } else if (key == "bins") {
    bins = static_cast<int>(parse_long(key, value));
  } else if (key == "ess_sup") {
    ess_sup = parse_double(key, value);
  } else if (key == "seed") {
    seed = static_cast<std::uint64_t>(parse_long(key, value));
  } else if (key == "workers") {
    workers = static_cast<int>(parse_long(key, value));
  } else if (key == "diagnostics") {
    diagnostics = value == "1" || value == "true" || value == "on";
  } else if (key == "diag_stride") {
    diag_stride = parse_long(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void ExperimentConfig::validate() const {
  if (!(sigma > 0.0)) throw ConfigError("sigma must be > 0");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0");
  if (!(tau > 0.0)) throw ConfigError("tau must be > 0");
  if (iterations <= 0) throw ConfigError("iterations must be > 0");
  if (burn_in < 0 || burn_in >= iterations)
    throw ConfigError("burn_in must satisfy 0 <= burn_in < iterations");
  if (thinning < 1) throw ConfigError("thinning must be >= 1");
  if (!(huber_delta > 0.0)) throw ConfigError("huber_delta must be > 0");
  if (labels < 1) throw ConfigError("labels must be >= 1");
  if (bp_iterations < 1) throw ConfigError("bp_iterations must be >= 1");
  if (q_levels.empty()) throw ConfigError("at least one q level is required");
  for (double q : q_levels)
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("q levels must be in (0,1)");
  if (bins < 1) throw ConfigError("bins must be >= 1");
  if (!(ess_sup > 0.0)) throw ConfigError("ess_sup must be > 0");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (diag_stride < 1) throw ConfigError("diag_stride must be >= 1");
  if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("theta must be in [0,1]");

  // sampler/prior compatibility, checked before any computation
  if (sampler == SamplerKind::ulpda && prior != PriorKind::tv)
    throw ConfigError("ulpda requires prior=tv");
  if ((sampler == SamplerKind::ula || sampler == SamplerKind::pula) && prior == PriorKind::tv)
    throw ConfigError(to_string(sampler) +
                      " requires a differentiable prior (huber_tv or foe)");
  if (sigma_dual > 0.0 && sigma_dual * tau * DiffOperator::norm_bound_sq > 1.0 + 1e-12)
    throw ConfigError("sigma_dual * tau * L^2 exceeds 1");
}

std::string ExperimentConfig::canonical() const {
  std::map<std::string, std::string> kv;
  kv["prior"] = to_string(prior);
  kv["sampler"] = to_string(sampler);
  kv["sigma"] = fmt(sigma);
  kv["lambda"] = fmt(lambda);
  kv["tau"] = fmt(tau);
  kv["sigma_dual"] = fmt(sigma_dual);
  kv["theta"] = fmt(theta);
  kv["iterations"] = std::to_string(iterations);
  kv["burn_in"] = std::to_string(burn_in);
  kv["thinning"] = std::to_string(thinning);
  kv["huber_delta"] = fmt(huber_delta);
  kv["foe_kernels"] = foe_kernels;
  kv["labels"] = std::to_string(labels);
  kv["bp_iterations"] = std::to_string(bp_iterations);
  std::string qs;
  for (double q : q_levels) qs += (qs.empty() ? "" : ",") + fmt(q);
  kv["q"] = qs;
  kv["bins"] = std::to_string(bins);
  kv["ess_sup"] = fmt(ess_sup);
  kv["seed"] = std::to_string(seed);
  kv["pooling"] = to_string(pooling);
  std::string out;
  for (const auto &[k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::string ExperimentConfig::hash() const {
  const std::string data = canonical();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::shared_ptr<const Prior> ExperimentConfig::make_prior() const {
  switch (prior) {
    case PriorKind::tv:
      return std::make_shared<TvPrior>();
    case PriorKind::huber_tv:
      return std::make_shared<HuberTvPrior>(huber_delta);
    case PriorKind::foe:
      return std::make_shared<FoEPrior>(foe_kernels.empty() ? default_foe_spec()
                                                            : load_foe_csv(foe_kernels));
  }
  throw ConfigError("unreachable prior kind");
}

PosteriorModel ExperimentConfig::make_model(const ImageGrid &observation) const {
  return {GaussianLikelihood(sigma, observation), make_prior(), lambda};
}

ChainStats ExperimentConfig::run_chain(const ImageGrid &observation, std::uint64_t chain_seed,
                                       const ChainObserver &observer) const {
  const PosteriorModel model = make_model(observation);
  if (sampler == SamplerKind::ulpda) {
    UlpdaConfig cfg;
    cfg.tau = tau;
    cfg.sigma = sigma_dual;
    cfg.theta = theta;
    cfg.iterations = iterations;
    cfg.burn_in = burn_in;
    cfg.thinning = thinning;
    cfg.seed = chain_seed;
    return ulpda_run(model, cfg, observer);
  }
  UlaConfig cfg;
  cfg.step = tau;
  cfg.iterations = iterations;
  cfg.burn_in = burn_in;
  cfg.thinning = thinning;
  cfg.seed = chain_seed;
  return sampler == SamplerKind::ula ? ula_run(model, cfg, observer)
                                     : pula_run(model, cfg, observer);
}

conformal::BinningScheme ExperimentConfig::make_bins(
    std::span<const conformal::CalibrationRecord> records) const {
  if (bins == 1) {
    // single catch-all bin over everything finite
    conformal::BinningScheme b;
    b.edges = {std::numeric_limits<double>::max()};
    return b;
  }
  return conformal::BinningScheme::for_records(records, bins);
}

}  // namespace uqband::cli
