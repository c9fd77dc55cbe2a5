#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "uqband/bp.hpp"
#include "uqband/io.hpp"
#include "uqband/metrics.hpp"
#include "uqband/priors.hpp"
#include "worker_pool.hpp"

namespace uqband::cli {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Short, filename-friendly rendering of a quantile level (0.9 -> "0.9").
std::string fmt_q(double q) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", q);
  return buf;
}

std::ofstream open_out(const fs::path &path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::vector<fs::path> sorted_paths(std::vector<fs::path> paths) {
  std::sort(paths.begin(), paths.end());
  return paths;
}

std::uint64_t chain_seed(std::uint64_t base, std::size_t index) {
  return splitmix64(base + static_cast<std::uint64_t>(index) + 1);
}

// Optional per-chain diagnostics stream: iteration, energy, and grid-level
// summaries of the running moments.
ChainObserver make_diag_observer(const ExperimentConfig &cfg, const PosteriorModel &model,
                                 const fs::path &csv_path, std::shared_ptr<std::ofstream> &out) {
  if (!cfg.diagnostics) return nullptr;
  out = std::make_shared<std::ofstream>(csv_path);
  if (!*out) throw IoError("cannot write " + csv_path.string());
  *out << "# config=" << cfg.hash() << "\n";
  *out << "iteration,energy,mean_of_mean,mean_of_variance\n";
  const long stride = cfg.diag_stride;
  return [&model, out, stride](long iter, const ImageGrid &x, const ChainStats &stats) {
    if (stats.count % stride != 0) return;
    *out << iter << "," << fmt(model.energy(x)) << "," << fmt(stats.mean.mean()) << ","
         << fmt(stats.variance().mean()) << "\n";
  };
}

struct ChainOutput {
  ImageGrid xhat;
  ImageGrid that;
};

ChainOutput run_one(const ExperimentConfig &cfg, const ImageGrid &z, std::uint64_t seed,
                    const fs::path &diag_path) {
  std::shared_ptr<std::ofstream> diag_stream;
  if (cfg.diagnostics) {
    const PosteriorModel model = cfg.make_model(z);
    const auto observer = make_diag_observer(cfg, model, diag_path, diag_stream);
    const ChainStats stats = cfg.run_chain(z, seed, observer);
    return {stats.mean, stats.variance()};
  }
  const ChainStats stats = cfg.run_chain(z, seed);
  return {stats.mean, stats.variance()};
}

ImageGrid squared_error_map(const ImageGrid &xhat, const ImageGrid &x) {
  require_same_shape(xhat, x, "squared error");
  ImageGrid s(x.height(), x.width());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = xhat[k] - x[k];
    s[k] = d * d;
  }
  return s;
}

void save_separate_tables(const SeparateTableSet &set, const fs::path &path,
                          const std::string &provenance) {
  auto out = open_out(path);
  if (!provenance.empty()) out << "# " << provenance << "\n";
  out << "pooling,separate\n";
  out << "height,width,q,ess_sup\n";
  const auto &first = set.tables.front();
  out << set.height << "," << set.width << "," << fmt(first.q) << "," << fmt(first.ess_sup)
      << "\n";
  out << "pixel,t_lo,t_hi,count,quantile\n";
  for (std::size_t p = 0; p < set.tables.size(); ++p) {
    const auto &table = set.tables[p];
    for (int k = 0; k < table.bins.bin_count(); ++k) {
      const auto [lo, hi] = table.bins.bin_range(k);
      out << p << "," << fmt(lo) << "," << (std::isinf(hi) ? "inf" : fmt(hi)) << ","
          << table.counts[k] << "," << fmt(table.quantiles[k]) << "\n";
    }
  }
}

SeparateTableSet load_separate_tables(std::istream &in) {
  SeparateTableSet set;
  std::string line;
  auto next = [&]() {
    while (std::getline(in, line))
      if (!line.empty() && line[0] != '#') return true;
    return false;
  };
  if (!next() || line != "height,width,q,ess_sup") throw IoError("bad separate table header");
  if (!next()) throw IoError("bad separate table metadata");
  double q = 0.0, ess = 0.0;
  {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    set.height = std::stoi(cell);
    std::getline(ss, cell, ',');
    set.width = std::stoi(cell);
    std::getline(ss, cell, ',');
    q = std::stod(cell);
    std::getline(ss, cell, ',');
    ess = std::stod(cell);
  }
  if (!next() || line != "pixel,t_lo,t_hi,count,quantile")
    throw IoError("bad separate table bin header");
  const std::size_t pixels = static_cast<std::size_t>(set.height) * set.width;
  std::vector<std::vector<double>> his(pixels);
  std::vector<std::vector<long>> counts(pixels);
  std::vector<std::vector<double>> quants(pixels);
  while (next()) {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    const std::size_t p = std::stoul(cell);
    if (p >= pixels) throw IoError("separate table pixel index out of range");
    std::getline(ss, cell, ',');  // t_lo, implied by the previous row's hi
    std::getline(ss, cell, ',');
    his[p].push_back(cell == "inf" ? std::numeric_limits<double>::infinity()
                                   : std::stod(cell));
    std::getline(ss, cell, ',');
    counts[p].push_back(std::stol(cell));
    std::getline(ss, cell, ',');
    quants[p].push_back(std::stod(cell));
  }
  set.tables.resize(pixels);
  for (std::size_t p = 0; p < pixels; ++p) {
    if (his[p].empty()) throw IoError("separate table misses pixel " + std::to_string(p));
    auto &table = set.tables[p];
    table.q = q;
    table.ess_sup = ess;
    table.bins.edges.assign(his[p].begin(), his[p].end() - 1);
    table.bins.validate();
    table.counts = counts[p];
    table.quantiles = quants[p];
  }
  return set;
}

}  // namespace

LoadedTable load_any_table(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open table " + path.string());
  // Peek the first data line to pick the format.
  std::string line;
  std::streampos after_comments = in.tellg();
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') break;
    after_comments = in.tellg();
  }
  LoadedTable loaded;
  if (line == "pooling,separate") {
    loaded.separate = true;
    loaded.per_pixel = load_separate_tables(in);
  } else {
    in.seekg(after_comments);
    loaded.joint = conformal::load_table_csv(in);
  }
  return loaded;
}

void cmd_corrupt(const CorruptOptions &opt) {
  if (opt.inputs.empty()) throw ConfigError("corrupt: no input images");
  if (opt.sigma < 0.0) throw ConfigError("corrupt: sigma must be >= 0");
  fs::create_directories(opt.out_dir);
  const auto inputs = sorted_paths(opt.inputs);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    ImageGrid x = load_image(inputs[i]);
    NormalSampler rng(chain_seed(opt.seed, i));
    for (auto &v : x.data()) v += opt.sigma * rng();
    const fs::path out = opt.out_dir / (inputs[i].stem().string() + ".noisy.cif");
    save_cif(x, out);
    if (opt.pgm_preview)
      save_pgm(x, opt.out_dir / (inputs[i].stem().string() + ".noisy.pgm"), 8);
  }
}

void cmd_calibrate(const CalibrateOptions &opt) {
  opt.config.validate();
  if (opt.truth.empty()) throw ConfigError("calibrate: no ground-truth images");
  if (opt.truth.size() != opt.observations.size())
    throw ConfigError("calibrate: truth/observation counts differ");
  fs::create_directories(opt.out_dir);
  const auto truth = sorted_paths(opt.truth);
  const auto obs = sorted_paths(opt.observations);
  const std::size_t m = truth.size();

  std::vector<ImageGrid> s_maps(m), t_maps(m);
  parallel_for_indexed(opt.config.workers, m, [&](std::size_t i) {
    const ImageGrid x = load_image(truth[i]);
    const ImageGrid z = load_image(obs[i]);
    require_same_shape(x, z, "calibrate pair " + truth[i].string());
    const fs::path diag = opt.out_dir / (obs[i].stem().string() + ".chain.csv");
    const ChainOutput res = run_one(opt.config, z, chain_seed(opt.config.seed, i), diag);
    s_maps[i] = squared_error_map(res.xhat, x);
    t_maps[i] = res.that;
  });

  const std::string provenance = "config=" + opt.config.hash();
  const auto records = conformal::pool_joint(s_maps, t_maps);
  {
    auto out = open_out(opt.out_dir / "records.csv");
    conformal::save_records_csv(records, out, provenance);
  }

  if (opt.config.pooling == PoolingMode::joint) {
    const auto bins = opt.config.make_bins(records);
    for (double q : opt.config.q_levels) {
      const auto table = conformal::build_table(records, bins, q, opt.config.ess_sup);
      auto out = open_out(opt.out_dir / ("table_q" + fmt_q(q) + ".csv"));
      conformal::save_table_csv(table, out, provenance);
    }
  } else {
    const auto sets = conformal::pool_separate(s_maps, t_maps);
    for (double q : opt.config.q_levels) {
      SeparateTableSet set;
      set.height = s_maps.front().height();
      set.width = s_maps.front().width();
      set.tables.resize(sets.size());
      parallel_for_indexed(opt.config.workers, sets.size(), [&](std::size_t p) {
        set.tables[p] = conformal::build_table(sets[p], opt.config.make_bins(sets[p]), q,
                                               opt.config.ess_sup);
      });
      save_separate_tables(set, opt.out_dir / ("table_q" + fmt_q(q) + ".csv"), provenance);
    }
  }
}

void cmd_predict(const PredictOptions &opt) {
  opt.config.validate();
  if (opt.tables.empty()) throw ConfigError("predict: no quantile tables given");
  if (opt.observations.empty()) throw ConfigError("predict: no observations");
  fs::create_directories(opt.out_dir);

  std::vector<LoadedTable> tables;
  for (const auto &path : sorted_paths(opt.tables)) tables.push_back(load_any_table(path));
  // Requested q levels must be served by the supplied tables.
  for (double q : opt.config.q_levels) {
    const bool found = std::any_of(tables.begin(), tables.end(), [&](const LoadedTable &t) {
      return std::abs(t.q() - q) < 1e-12;
    });
    if (!found)
      throw ConfigError("predict: no table for requested q=" + fmt_q(q));
  }

  const auto obs = sorted_paths(opt.observations);
  parallel_for_indexed(opt.config.workers, obs.size(), [&](std::size_t i) {
    const ImageGrid z = load_image(obs[i]);
    const fs::path diag = opt.out_dir / (obs[i].stem().string() + ".chain.csv");
    const ChainOutput res = run_one(opt.config, z, chain_seed(opt.config.seed, i), diag);
    const std::string stem = obs[i].stem().string();
    save_cif(res.xhat, opt.out_dir / (stem + ".xhat.cif"));
    save_cif(res.that, opt.out_dir / (stem + ".that.cif"));
    for (const LoadedTable &loaded : tables) {
      ImageGrid sq(z.height(), z.width());
      if (loaded.separate) {
        if (loaded.per_pixel.height != z.height() || loaded.per_pixel.width != z.width())
          throw ShapeError("predict: separate table dimensions do not match observation");
        for (std::size_t p = 0; p < sq.size(); ++p)
          sq[p] = conformal::predict_quantile(loaded.per_pixel.tables[p], res.that[p]);
      } else {
        sq = conformal::predict_quantile_map(loaded.joint, res.that);
      }
      save_cif(sq, opt.out_dir / (stem + ".sq_q" + fmt_q(loaded.q()) + ".cif"));
    }
  });
}

void cmd_evaluate(const EvaluateOptions &opt) {
  if (opt.truth.empty()) throw ConfigError("evaluate: no ground-truth images");
  const auto truth = sorted_paths(opt.truth);

  // Prediction groups are discovered from the *.xhat.cif files.
  std::vector<fs::path> xhat_files;
  for (const auto &entry : fs::directory_iterator(opt.pred_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 9 && name.substr(name.size() - 9) == ".xhat.cif")
      xhat_files.push_back(entry.path());
  }
  std::sort(xhat_files.begin(), xhat_files.end());
  if (xhat_files.size() != truth.size())
    throw ConfigError("evaluate: found " + std::to_string(xhat_files.size()) +
                      " predictions for " + std::to_string(truth.size()) + " truths");

  auto out = open_out(opt.out_csv);
  out << "# config=" << opt.config.hash() << "\n";
  out << "image,psnr,ssim";
  for (double q : opt.config.q_levels) out << ",coverage_q" << fmt_q(q);
  out << "\n";

  std::vector<conformal::CalibrationRecord> records;
  std::vector<double> psnr_sum, cov_sum(opt.config.q_levels.size(), 0.0);
  double psnr_total = 0.0, ssim_total = 0.0;
  long finite_psnr = 0;

  for (std::size_t i = 0; i < truth.size(); ++i) {
    const ImageGrid x = load_image(truth[i]);
    const std::string base = xhat_files[i].filename().string();
    const std::string stem = base.substr(0, base.size() - 9);
    const fs::path dir = opt.pred_dir;
    const ImageGrid xhat = load_cif(dir / (stem + ".xhat.cif"));
    const ImageGrid that = load_cif(dir / (stem + ".that.cif"));
    require_same_shape(x, xhat, "evaluate pair " + truth[i].string());

    const ImageGrid s = squared_error_map(xhat, x);
    for (std::size_t k = 0; k < s.size(); ++k) records.push_back({s[k], that[k]});

    const double p = psnr(x, xhat);
    const double ss = ssim(x, xhat);
    if (std::isfinite(p)) {
      psnr_total += p;
      ++finite_psnr;
    }
    ssim_total += ss;

    out << stem << "," << (std::isfinite(p) ? fmt(p) : "inf") << "," << fmt(ss);
    for (std::size_t qi = 0; qi < opt.config.q_levels.size(); ++qi) {
      const fs::path sq_path =
          dir / (stem + ".sq_q" + fmt_q(opt.config.q_levels[qi]) + ".cif");
      const double cov = conformal::coverage(s, load_cif(sq_path));
      cov_sum[qi] += cov;
      out << "," << fmt(cov);
    }
    out << "\n";
  }

  const double n = static_cast<double>(truth.size());
  out << "mean," << (finite_psnr > 0 ? fmt(psnr_total / finite_psnr) : "inf") << ","
      << fmt(ssim_total / n);
  for (double c : cov_sum) out << "," << fmt(c / n);
  out << "\n";

  // Pooled mutual information of (s, t_hat) over the whole test set.
  double mi = std::numeric_limits<double>::quiet_NaN();
  if (records.size() >= 1000) {
    try {
      mi = conformal::mutual_information(records);
    } catch (const StatError &) {
      // degenerate record set: leave as NaN
    }
  }
  out << "mutual_information," << (std::isnan(mi) ? "nan" : fmt(mi)) << "\n";
}

namespace {

std::vector<long> geometric_checkpoints(long total) {
  std::vector<long> cps;
  for (long c = total; c >= 32; c /= 2) cps.push_back(c);
  if (cps.empty()) cps.push_back(total);
  std::reverse(cps.begin(), cps.end());
  return cps;
}

struct BpReference {
  ImageGrid mean;
  ImageGrid var;
};

BpReference bp_reference(const ExperimentConfig &cfg, const ImageGrid &z) {
  const auto labels = bp::LabelSpace::subdivisions(cfg.labels);
  const auto mrf = bp::MrfModel::tv_denoising(z, cfg.sigma, cfg.lambda, labels);
  const auto marg = bp::bp_sweep(mrf, cfg.bp_iterations);
  auto [mean, var] = bp::bp_moments(marg, labels);
  return {std::move(mean), std::move(var)};
}

void write_convergence_rows(std::ofstream &out, const ExperimentConfig &cfg,
                            const ImageGrid &z, const BpReference &ref, long thinning) {
  ExperimentConfig run_cfg = cfg;
  run_cfg.thinning = thinning;
  const long total = (run_cfg.iterations - run_cfg.burn_in + thinning - 1) / thinning;
  const auto checkpoints = geometric_checkpoints(total);
  std::size_t next = 0;
  run_cfg.run_chain(z, run_cfg.seed,
                    [&](long, const ImageGrid &, const ChainStats &stats) {
                      if (next >= checkpoints.size() || stats.count != checkpoints[next])
                        return;
                      ++next;
                      const auto [md_mean, md_var] =
                          bp::compare_to_chain(ref.mean, ref.var, stats);
                      out << thinning << "," << stats.count << ","
                          << stats.count * thinning + run_cfg.burn_in << "," << fmt(md_mean)
                          << "," << fmt(md_var) << "\n";
                    });
}

}  // namespace

void cmd_bp_compare(const BpCompareOptions &opt) {
  opt.config.validate();
  if (opt.config.prior == PriorKind::foe)
    throw ConfigError("bp-compare requires a pairwise-decomposable model (tv or huber_tv)");
  const ImageGrid z = load_image(opt.observation);
  const BpReference ref = bp_reference(opt.config, z);

  auto out = open_out(opt.out_csv);
  out << "# config=" << opt.config.hash() << "\n";
  out << "thinning,samples,iterations,md_mean,md_var\n";
  write_convergence_rows(out, opt.config, z, ref, opt.config.thinning);

  if (opt.dump_marginals || opt.marginal_slice_row >= 0) {
    const auto labels = bp::LabelSpace::subdivisions(opt.config.labels);
    const auto mrf = bp::MrfModel::tv_denoising(z, opt.config.sigma, opt.config.lambda, labels);
    const auto marg = bp::bp_sweep(mrf, opt.config.bp_iterations);
    const fs::path dir = opt.out_csv.parent_path().empty() ? fs::path(".")
                                                           : opt.out_csv.parent_path();
    if (opt.dump_marginals) {
      for (int k = 0; k < marg.label_count; ++k)
        save_cif(bp::marginal_slice(marg, k),
                 dir / ("marginal_label" + std::to_string(k) + ".cif"));
    }
    if (opt.marginal_slice_row >= 0) {
      if (opt.marginal_slice_row >= z.height())
        throw ConfigError("marginal slice row out of range");
      auto slice = open_out(dir / ("marginals_row" + std::to_string(opt.marginal_slice_row) +
                                   ".csv"));
      slice << "# config=" << opt.config.hash() << "\n";
      slice << "column,label,value,probability\n";
      for (int j = 0; j < z.width(); ++j) {
        const int pix = opt.marginal_slice_row * z.width() + j;
        for (int k = 0; k < marg.label_count; ++k)
          slice << j << "," << k << "," << fmt(labels.values[k]) << ","
                << fmt(marg.at(pix, k)) << "\n";
      }
    }
  }
}

void cmd_thinning_study(const ThinningStudyOptions &opt) {
  opt.config.validate();
  if (opt.config.prior == PriorKind::foe)
    throw ConfigError("thinning-study requires a pairwise-decomposable model");
  if (opt.thinnings.empty()) throw ConfigError("thinning-study: empty H list");
  for (long h : opt.thinnings)
    if (h < 1) throw ConfigError("thinning-study: H must be >= 1");

  const ImageGrid z = load_image(opt.observation);
  const BpReference ref = bp_reference(opt.config, z);

  auto out = open_out(opt.out_csv);
  out << "# config=" << opt.config.hash() << "\n";
  out << "thinning,samples,iterations,md_mean,md_var\n";
  for (long h : opt.thinnings) write_convergence_rows(out, opt.config, z, ref, h);
}

namespace {

std::string toy_hash(const ToyOptions &opt) {
  std::string data;
  for (double c : opt.spec.centers) data += fmt(c) + ",";
  for (double v : opt.spec.component_vars) data += fmt(v) + ",";
  for (double w : opt.spec.weights) data += fmt(w) + ",";
  data += fmt(opt.spec.noise_var) + ";" + std::to_string(opt.m) + ";" +
          std::to_string(opt.n) + ";";
  for (double q : opt.q_levels) data += fmt(q) + ",";
  data += std::to_string(opt.bins) + ";" + fmt(opt.ess_sup) + ";" + std::to_string(opt.seed);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

void cmd_toy(const ToyOptions &opt) {
  opt.spec.validate();
  if (opt.q_levels.empty()) throw ConfigError("toy: at least one q level required");
  fs::create_directories(opt.out_dir);
  const std::string provenance = "# config=" + toy_hash(opt) + "\n";

  auto summary = open_out(opt.out_dir / "toy_summary.csv");
  summary << provenance;
  summary << "q,coverage,m,n,seed\n";
  for (double q : opt.q_levels) {
    const auto res =
        toy1d::toy_pipeline_check(opt.spec, opt.m, opt.n, q, opt.seed, opt.bins, opt.ess_sup);
    summary << fmt_q(q) << "," << fmt(res.coverage) << "," << opt.m << "," << opt.n << ","
            << opt.seed << "\n";
    auto out = open_out(opt.out_dir / ("toy_bins_q" + fmt_q(q) + ".csv"));
    out << provenance;
    out << "bin_lo,bin_hi,n_cal,conformal_q,exact_q,bin_coverage,n_test\n";
    for (const auto &row : res.bins) {
      out << fmt(row.t_lo) << "," << (std::isinf(row.t_hi) ? "inf" : fmt(row.t_hi)) << ","
          << row.n_cal << "," << fmt(row.conformal_q) << ","
          << (std::isnan(row.exact_q) ? "nan" : fmt(row.exact_q)) << ","
          << fmt(row.bin_coverage) << "," << row.n_test << "\n";
    }
  }

  // Joint density grid dump for plots: log-spaced (s, t) lattice.
  const toy1d::JointDensity joint(opt.spec);
  const int g = opt.density_grid;
  const double tlo = joint.t_min() * 1.0001, thi = joint.t_max() * 0.9999;
  const double slo = joint.t_min() * 1e-2;
  double spread = 0.0;
  for (double c : opt.spec.centers) spread = std::max(spread, std::abs(c));
  const double shi = std::max(1.0, 4.0 * spread * spread);
  auto dens = open_out(opt.out_dir / "toy_density.csv");
  dens << provenance;
  dens << "s,t,density\n";
  std::vector<double> s_values(g);
  for (int i = 0; i < g; ++i)
    s_values[i] = std::exp(std::log(slo) + (std::log(shi) - std::log(slo)) * i / (g - 1));
  for (int j = 0; j < g; ++j) {
    const double t = std::exp(std::log(tlo) + (std::log(thi) - std::log(tlo)) * j / (g - 1));
    const auto profile = joint.density_profile(t, s_values);
    for (int i = 0; i < g; ++i)
      dens << fmt(s_values[i]) << "," << fmt(t) << "," << fmt(profile[i]) << "\n";
  }
}

}  // namespace uqband::cli
