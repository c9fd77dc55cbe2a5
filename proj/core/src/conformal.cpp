#include "uqband/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace uqband::conformal {

BinningScheme BinningScheme::log_spaced(double lo, double hi, int interior) {
  if (!(lo > 0.0) || !(hi > lo)) throw ConfigError("log binning needs 0 < lo < hi");
  if (interior < 1) throw ConfigError("binning needs at least one interior bin");
  BinningScheme b;
  b.scale = Scale::logarithmic;
  const double llo = std::log(lo), lhi = std::log(hi);
  b.edges.resize(interior + 1);
  for (int k = 0; k <= interior; ++k)
    b.edges[k] = std::exp(llo + (lhi - llo) * k / interior);
  b.edges.front() = lo;  // exact endpoints regardless of exp/log roundoff
  b.edges.back() = hi;
  b.validate();
  return b;
}

BinningScheme BinningScheme::linear_spaced(double lo, double hi, int interior) {
  if (!(hi > lo) || lo < 0.0) throw ConfigError("linear binning needs 0 <= lo < hi");
  if (interior < 1) throw ConfigError("binning needs at least one interior bin");
  BinningScheme b;
  b.scale = Scale::linear;
  b.edges.resize(interior + 1);
  for (int k = 0; k <= interior; ++k) b.edges[k] = lo + (hi - lo) * k / interior;
  if (b.edges.front() <= 0.0) b.edges.erase(b.edges.begin());
  b.validate();
  return b;
}

BinningScheme BinningScheme::for_records(std::span<const CalibrationRecord> records,
                                         int interior) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto &r : records) {
    if (r.t_hat > 0.0) {
      lo = std::min(lo, r.t_hat);
      hi = std::max(hi, r.t_hat);
    }
  }
  if (!(hi > 0.0) || !(hi > lo)) {
    // Degenerate calibration sets get a single catch-all split.
    const double pivot = hi > 0.0 ? hi : 1.0;
    BinningScheme b;
    b.edges = {pivot};
    return b;
  }
  return log_spaced(lo, hi, interior);
}

void BinningScheme::validate() const {
  if (edges.empty()) throw ConfigError("binning scheme has no edges");
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (!(edges[k] > 0.0) || !std::isfinite(edges[k]))
      throw ConfigError("bin edges must be positive and finite");
    if (k > 0 && !(edges[k] > edges[k - 1]))
      throw ConfigError("bin edges must be strictly increasing");
  }
}

int BinningScheme::bin_of(double t_hat) const {
  // upper_bound gives the number of edges <= t_hat, which is the bin index
  // for half-open [e_{k-1}, e_k) intervals.
  const auto it = std::upper_bound(edges.begin(), edges.end(), t_hat);
  return static_cast<int>(it - edges.begin());
}

std::pair<double, double> BinningScheme::bin_range(int k) const {
  if (k < 0 || k >= bin_count()) throw ConfigError("bin index out of range");
  const double lo = k == 0 ? 0.0 : edges[k - 1];
  const double hi =
      k == bin_count() - 1 ? std::numeric_limits<double>::infinity() : edges[k];
  return {lo, hi};
}

double conformal_quantile(std::span<const double> values, double q, double ess_sup) {
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("quantile level q must be in (0,1)");
  const std::size_t n = values.size();
  const double rank = std::ceil((static_cast<double>(n) + 1.0) * q);
  if (rank > static_cast<double>(n)) return ess_sup;
  const auto k = static_cast<std::size_t>(rank);  // 1-based order statistic
  std::vector<double> work(values.begin(), values.end());
  std::nth_element(work.begin(), work.begin() + (k - 1), work.end());
  return work[k - 1];
}

QuantileTable build_table(std::span<const CalibrationRecord> records,
                          const BinningScheme &bins, double q, double ess_sup) {
  if (records.empty()) throw ConfigError("build_table needs at least one record");
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("quantile level q must be in (0,1)");
  bins.validate();
  QuantileTable table;
  table.q = q;
  table.ess_sup = ess_sup;
  table.bins = bins;
  const int nbins = bins.bin_count();
  std::vector<std::vector<double>> grouped(nbins);
  for (const auto &r : records) {
    if (!std::isfinite(r.s) || !std::isfinite(r.t_hat) || r.s < 0.0 || r.t_hat < 0.0)
      throw ConfigError("calibration records must be finite and nonnegative");
    grouped[bins.bin_of(r.t_hat)].push_back(r.s);
  }
  table.counts.resize(nbins);
  table.quantiles.resize(nbins);
  for (int k = 0; k < nbins; ++k) {
    table.counts[k] = static_cast<long>(grouped[k].size());
    table.quantiles[k] = conformal_quantile(grouped[k], q, ess_sup);
  }
  return table;
}

double predict_quantile(const QuantileTable &table, double t_hat) {
  if (!(t_hat >= 0.0)) throw ConfigError("predict_quantile needs t_hat >= 0");
  return table.quantiles[table.bins.bin_of(t_hat)];
}

ImageGrid predict_quantile_map(const QuantileTable &table, const ImageGrid &t_map) {
  ImageGrid q(t_map.height(), t_map.width());
  for (std::size_t k = 0; k < t_map.size(); ++k) q[k] = predict_quantile(table, t_map[k]);
  return q;
}

double coverage(const ImageGrid &s_map, const ImageGrid &q_map) {
  require_same_shape(s_map, q_map, "coverage");
  std::size_t hits = 0;
  for (std::size_t k = 0; k < s_map.size(); ++k)
    if (s_map[k] <= q_map[k]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(s_map.size());
}

double mutual_information(std::span<const CalibrationRecord> records, int grid,
                          std::size_t min_records) {
  if (grid < 2) throw ConfigError("mutual information grid must be >= 2");
  std::vector<std::pair<double, double>> pts;
  pts.reserve(records.size());
  for (const auto &r : records)
    if (r.s > 0.0 && r.t_hat > 0.0) pts.emplace_back(std::log(r.s), std::log(r.t_hat));
  if (pts.size() < min_records)
    throw StatError("mutual information needs at least " + std::to_string(min_records) +
                    " usable records, got " + std::to_string(pts.size()));

  double slo = pts[0].first, shi = pts[0].first;
  double tlo = pts[0].second, thi = pts[0].second;
  for (const auto &[ls, lt] : pts) {
    slo = std::min(slo, ls);
    shi = std::max(shi, ls);
    tlo = std::min(tlo, lt);
    thi = std::max(thi, lt);
  }
  if (!(shi > slo) || !(thi > tlo))
    throw StatError("mutual information needs nondegenerate s and t_hat ranges");

  const double n = static_cast<double>(pts.size());
  std::vector<double> joint(static_cast<std::size_t>(grid) * grid, 0.0);
  auto cell = [grid](double v, double lo, double hi) {
    const int c = static_cast<int>((v - lo) / (hi - lo) * grid);
    return std::clamp(c, 0, grid - 1);
  };
  for (const auto &[ls, lt] : pts)
    joint[static_cast<std::size_t>(cell(ls, slo, shi)) * grid + cell(lt, tlo, thi)] += 1.0;

  std::vector<double> ps(grid, 0.0), pt(grid, 0.0);
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const double p = joint[static_cast<std::size_t>(i) * grid + j] / n;
      ps[i] += p;
      pt[j] += p;
    }

  double mi = 0.0;
  long occupied_joint = 0;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const double p = joint[static_cast<std::size_t>(i) * grid + j] / n;
      if (p > 0.0) {
        mi += p * std::log(p / (ps[i] * pt[j]));
        ++occupied_joint;
      }
    }
  const long occ_s = static_cast<long>(std::count_if(ps.begin(), ps.end(),
                                                     [](double p) { return p > 0.0; }));
  const long occ_t = static_cast<long>(std::count_if(pt.begin(), pt.end(),
                                                     [](double p) { return p > 0.0; }));
  // Miller-Madow correction of the plug-in estimate.
  mi -= static_cast<double>(occupied_joint - occ_s - occ_t + 1) / (2.0 * n);
  return std::max(mi, 0.0);
}

std::vector<CalibrationRecord> pool_joint(const std::vector<ImageGrid> &s_maps,
                                          const std::vector<ImageGrid> &t_maps) {
  if (s_maps.size() != t_maps.size())
    throw ShapeError("pool_joint: mismatched number of s and t maps");
  std::vector<CalibrationRecord> records;
  for (std::size_t m = 0; m < s_maps.size(); ++m) {
    require_same_shape(s_maps[m], t_maps[m], "pool_joint");
    for (std::size_t k = 0; k < s_maps[m].size(); ++k)
      records.push_back({s_maps[m][k], t_maps[m][k]});
  }
  return records;
}

std::vector<std::vector<CalibrationRecord>> pool_separate(
    const std::vector<ImageGrid> &s_maps, const std::vector<ImageGrid> &t_maps) {
  if (s_maps.size() != t_maps.size())
    throw ShapeError("pool_separate: mismatched number of s and t maps");
  if (s_maps.empty()) return {};
  const ImageGrid &ref = s_maps.front();
  std::vector<std::vector<CalibrationRecord>> sets(ref.size());
  for (std::size_t m = 0; m < s_maps.size(); ++m) {
    require_same_shape(s_maps[m], t_maps[m], "pool_separate");
    require_same_shape(s_maps[m], ref, "pool_separate");
    for (std::size_t k = 0; k < ref.size(); ++k)
      sets[k].push_back({s_maps[m][k], t_maps[m][k]});
  }
  return sets;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string next_data_line(std::istream &in) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') return line;
  }
  throw IoError("unexpected end of CSV");
}

std::vector<std::string> split_csv(const std::string &line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

void save_table_csv(const QuantileTable &table, std::ostream &out,
                    const std::string &provenance) {
  if (!provenance.empty()) out << "# " << provenance << "\n";
  out << "q,ess_sup,scale\n";
  out << fmt(table.q) << "," << fmt(table.ess_sup) << ","
      << (table.bins.scale == BinningScheme::Scale::logarithmic ? "logarithmic" : "linear")
      << "\n";
  out << "t_lo,t_hi,count,quantile\n";
  for (int k = 0; k < table.bins.bin_count(); ++k) {
    const auto [lo, hi] = table.bins.bin_range(k);
    out << fmt(lo) << "," << (std::isinf(hi) ? "inf" : fmt(hi)) << "," << table.counts[k]
        << "," << fmt(table.quantiles[k]) << "\n";
  }
}

QuantileTable load_table_csv(std::istream &in) {
  QuantileTable table;
  if (next_data_line(in) != "q,ess_sup,scale") throw IoError("bad quantile table header");
  const auto meta = split_csv(next_data_line(in));
  if (meta.size() != 3) throw IoError("bad quantile table metadata row");
  table.q = std::stod(meta[0]);
  table.ess_sup = std::stod(meta[1]);
  table.bins.scale = meta[2] == "linear" ? BinningScheme::Scale::linear
                                         : BinningScheme::Scale::logarithmic;
  if (next_data_line(in) != "t_lo,t_hi,count,quantile")
    throw IoError("bad quantile table bin header");
  std::string line;
  std::vector<double> his;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw IoError("bad quantile table bin row: " + line);
    his.push_back(cells[1] == "inf" ? std::numeric_limits<double>::infinity()
                                    : std::stod(cells[1]));
    table.counts.push_back(std::stol(cells[2]));
    table.quantiles.push_back(std::stod(cells[3]));
  }
  if (his.empty()) throw IoError("quantile table has no bins");
  table.bins.edges.assign(his.begin(), his.end() - 1);
  table.bins.validate();
  if (static_cast<int>(table.counts.size()) != table.bins.bin_count())
    throw IoError("quantile table bin count mismatch");
  return table;
}

void save_records_csv(std::span<const CalibrationRecord> records, std::ostream &out,
                      const std::string &provenance) {
  if (!provenance.empty()) out << "# " << provenance << "\n";
  out << "s,t_hat\n";
  for (const auto &r : records) out << fmt(r.s) << "," << fmt(r.t_hat) << "\n";
}

std::vector<CalibrationRecord> load_records_csv(std::istream &in) {
  if (next_data_line(in) != "s,t_hat") throw IoError("bad records CSV header");
  std::vector<CalibrationRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv(line);
    if (cells.size() != 2) throw IoError("bad records CSV row: " + line);
    records.push_back({std::stod(cells[0]), std::stod(cells[1])});
  }
  return records;
}

}  // namespace uqband::conformal
