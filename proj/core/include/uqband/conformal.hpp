#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "uqband/image.hpp"

namespace uqband::conformal {

/// One calibration pair: squared prediction error s = (xhat - x)^2 and the
/// estimated posterior variance t_hat of the same pixel.
struct CalibrationRecord {
  double s = 0.0;
  double t_hat = 0.0;
};

/// Disjoint variance intervals covering [0, inf): bin 0 = [0, e_0),
/// bin k = [e_{k-1}, e_k), last bin = [e_last, inf). The interior edges must
/// be strictly increasing and positive.
struct BinningScheme {
  enum class Scale { linear, logarithmic };

  std::vector<double> edges;
  Scale scale = Scale::logarithmic;

  /// Logarithmically spaced edges splitting [lo, hi] into `interior` bins,
  /// plus the two open-ended boundary bins.
  static BinningScheme log_spaced(double lo, double hi, int interior = 25);
  /// Linearly spaced analogue.
  static BinningScheme linear_spaced(double lo, double hi, int interior = 25);
  /// Default scheme over the occupied t_hat range of a calibration set.
  static BinningScheme for_records(std::span<const CalibrationRecord> records,
                                   int interior = 25);

  void validate() const;
  int bin_count() const { return static_cast<int>(edges.size()) + 1; }
  /// Total lookup: t < first edge -> 0, t >= last edge -> last bin.
  int bin_of(double t_hat) const;
  /// [lo, hi) of bin k; hi is +inf for the last bin.
  std::pair<double, double> bin_range(int k) const;
};

/// Conformalized q-quantile of a finite sample: the ceil((N+1)q)-th smallest
/// value when that index exists, otherwise the essential-supremum fallback
/// (which also covers the empty-sample case). q must lie in (0,1).
double conformal_quantile(std::span<const double> values, double q, double ess_sup);

/// Per-variance-bin conformalized error quantiles.
struct QuantileTable {
  double q = 0.9;
  double ess_sup = 1.0;
  BinningScheme bins;
  std::vector<long> counts;       // N_k per bin
  std::vector<double> quantiles;  // conformalized quantile per bin
};

QuantileTable build_table(std::span<const CalibrationRecord> records,
                          const BinningScheme &bins, double q, double ess_sup);

/// Bin lookup followed by table read; total in t_hat >= 0.
double predict_quantile(const QuantileTable &table, double t_hat);
ImageGrid predict_quantile_map(const QuantileTable &table, const ImageGrid &t_map);

/// Fraction of pixels whose error is covered: |{(i,j): s <= q}| / (MN).
double coverage(const ImageGrid &s_map, const ImageGrid &q_map);

/// Mutual information of (s, t_hat) in nats from a 2D histogram over
/// log-transformed coordinates (MI is invariant under smooth monotone
/// reparametrization). The plug-in estimate carries a positive
/// O(bins^2 / N) bias, so the Miller-Madow correction is subtracted and the
/// result clamped at 0. Records with nonpositive s or t_hat are skipped.
double mutual_information(std::span<const CalibrationRecord> records, int grid = 64,
                          std::size_t min_records = 1000);

/// Pixel-joint pooling: every pixel of every image becomes one record.
std::vector<CalibrationRecord> pool_joint(const std::vector<ImageGrid> &s_maps,
                                          const std::vector<ImageGrid> &t_maps);

/// Pixel-separate pooling: one record set per pixel position; all images
/// must share dimensions.
std::vector<std::vector<CalibrationRecord>> pool_separate(
    const std::vector<ImageGrid> &s_maps, const std::vector<ImageGrid> &t_maps);

// CSV round trips. Tables: header row (q, ess_sup, scale) then one row
// (t_lo, t_hi, count, quantile) per bin. Records: two columns s, t_hat.
// Lines starting with '#' are provenance comments and are skipped on read.
void save_table_csv(const QuantileTable &table, std::ostream &out,
                    const std::string &provenance = "");
QuantileTable load_table_csv(std::istream &in);
void save_records_csv(std::span<const CalibrationRecord> records, std::ostream &out,
                      const std::string &provenance = "");
std::vector<CalibrationRecord> load_records_csv(std::istream &in);

}  // namespace uqband::conformal
