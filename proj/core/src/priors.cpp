#include "uqband/priors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace uqband {

StackedField DiffOperator::apply(const ImageGrid &x) const {
  if (x.height() != height || x.width() != width)
    throw ShapeError("apply_D: grid does not match operator dimensions");
  StackedField d(height, width);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      if (i + 1 < height) d.at(i, j, 0) = x.at(i + 1, j) - x.at(i, j);
      if (j + 1 < width) d.at(i, j, 1) = x.at(i, j + 1) - x.at(i, j);
    }
  }
  return d;
}

ImageGrid DiffOperator::apply_adjoint(const StackedField &p) const {
  if (p.height != height || p.width != width)
    throw ShapeError("apply_D adjoint: field does not match operator dimensions");
  ImageGrid g(height, width);
  // Boundary rows/columns of Dx are forced to zero, so the corresponding p
  // entries never enter the pairing and are ignored here.
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      double acc = 0.0;
      if (i + 1 < height) acc -= p.at(i, j, 0);
      if (i > 0) acc += p.at(i - 1, j, 0);
      if (j + 1 < width) acc -= p.at(i, j, 1);
      if (j > 0) acc += p.at(i, j - 1, 1);
      g.at(i, j) = acc;
    }
  }
  return g;
}

double tv_energy(const ImageGrid &x) {
  const DiffOperator op(x.height(), x.width());
  const StackedField d = op.apply(x);
  double acc = 0.0;
  for (double v : d.v) acc += std::abs(v);
  return acc;
}

namespace {

inline double huber(double t, double delta) {
  const double a = std::abs(t);
  return a <= delta ? t * t / (2.0 * delta) : a - delta / 2.0;
}

}  // namespace

double huber_tv_energy(const ImageGrid &x, double delta) {
  if (!(delta > 0.0)) throw ConfigError("huber delta must be > 0");
  const DiffOperator op(x.height(), x.width());
  const StackedField d = op.apply(x);
  double acc = 0.0;
  for (double v : d.v) acc += huber(v, delta);
  return acc;
}

ImageGrid huber_tv_gradient(const ImageGrid &x, double delta) {
  if (!(delta > 0.0)) throw ConfigError("huber delta must be > 0");
  const DiffOperator op(x.height(), x.width());
  StackedField d = op.apply(x);
  for (double &v : d.v) v = std::clamp(v / delta, -1.0, 1.0);
  return op.apply_adjoint(d);
}

StackedField l1_dual_prox(const StackedField &p, double step, double weight) {
  if (!(step > 0.0)) throw ConfigError("dual prox step must be > 0");
  if (weight < 0.0) throw ConfigError("dual prox weight must be >= 0");
  StackedField q = p;
  for (double &v : q.v) v = std::clamp(v, -weight, weight);
  return q;
}

void FoESpec::validate() const {
  if (kernels.empty() || kernels.size() != alphas.size())
    throw ConfigError("FoE spec needs matching, nonempty kernel/alpha lists");
  for (double a : alphas)
    if (!(a > 0.0)) throw ConfigError("FoE alphas must be > 0");
  for (const ImageGrid &k : kernels)
    if (k.empty() || !k.all_finite()) throw ConfigError("FoE kernel empty or non-finite");
}

FoESpec default_foe_spec() {
  // 3x3 DCT-II separable basis; the flat DC filter is dropped.
  const int n = 3;
  auto basis = [&](int u, int a) {
    const double c = u == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    return c * std::cos(M_PI * u * (2.0 * a + 1.0) / (2.0 * n));
  };
  FoESpec spec;
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (u == 0 && v == 0) continue;
      ImageGrid k(n, n);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) k.at(a, b) = basis(u, a) * basis(v, b);
      spec.kernels.push_back(std::move(k));
      spec.alphas.push_back(1.0);
    }
  }
  return spec;
}

FoESpec load_foe_csv(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  FoESpec spec;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::vector<double> values;
    std::string cell;
    while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
    if (values.size() < 2) throw IoError("FoE CSV row too short in " + path.string());
    const std::size_t count = values.size() - 1;
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(count))));
    if (static_cast<std::size_t>(side) * side != count)
      throw IoError("FoE CSV kernel weight count is not a perfect square in " + path.string());
    spec.alphas.push_back(values[0]);
    spec.kernels.push_back(
        ImageGrid::from_data(side, side, {values.begin() + 1, values.end()}));
  }
  spec.validate();
  return spec;
}

void save_foe_csv(const FoESpec &spec, const std::filesystem::path &path) {
  spec.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  for (std::size_t c = 0; c < spec.kernels.size(); ++c) {
    out << spec.alphas[c];
    for (double w : spec.kernels[c].data()) out << "," << w;
    out << "\n";
  }
}

namespace {

// reflect101 index fold: ..., 2, 1, 0 -> -1 maps to 1, n maps to n-2.
inline int reflect(int idx, int n) {
  if (idx < 0) return -idx;
  if (idx >= n) return 2 * n - 2 - idx;
  return idx;
}

void check_kernel_fits(const FoESpec &spec, const ImageGrid &x) {
  spec.validate();
  for (const ImageGrid &k : spec.kernels)
    if (k.height() > x.height() || k.width() > x.width())
      throw ConfigError("FoE kernel larger than image");
}

// Filter response (k*x) with reflect padding; correlation orientation.
ImageGrid filter(const ImageGrid &k, const ImageGrid &x) {
  const int kh = k.height(), kw = k.width();
  const int ch = kh / 2, cw = kw / 2;
  ImageGrid r(x.height(), x.width());
  for (int i = 0; i < x.height(); ++i) {
    for (int j = 0; j < x.width(); ++j) {
      double acc = 0.0;
      for (int a = 0; a < kh; ++a)
        for (int b = 0; b < kw; ++b)
          acc += k.at(a, b) *
                 x.at(reflect(i + a - ch, x.height()), reflect(j + b - cw, x.width()));
      r.at(i, j) = acc;
    }
  }
  return r;
}

// Exact adjoint of filter(): scatters back through the same reflected indices.
void filter_adjoint_accumulate(const ImageGrid &k, const ImageGrid &w, ImageGrid &out) {
  const int kh = k.height(), kw = k.width();
  const int ch = kh / 2, cw = kw / 2;
  for (int i = 0; i < w.height(); ++i) {
    for (int j = 0; j < w.width(); ++j) {
      const double wij = w.at(i, j);
      for (int a = 0; a < kh; ++a)
        for (int b = 0; b < kw; ++b)
          out.at(reflect(i + a - ch, w.height()), reflect(j + b - cw, w.width())) +=
              k.at(a, b) * wij;
    }
  }
}

}  // namespace

double foe_energy(const FoESpec &spec, const ImageGrid &x) {
  check_kernel_fits(spec, x);
  double acc = 0.0;
  for (std::size_t c = 0; c < spec.kernels.size(); ++c) {
    const ImageGrid r = filter(spec.kernels[c], x);
    double e = 0.0;
    for (double v : r.data()) e += std::log1p(v * v);
    acc += spec.alphas[c] * e;
  }
  return acc;
}

ImageGrid foe_gradient(const FoESpec &spec, const ImageGrid &x) {
  check_kernel_fits(spec, x);
  ImageGrid g(x.height(), x.width());
  for (std::size_t c = 0; c < spec.kernels.size(); ++c) {
    ImageGrid r = filter(spec.kernels[c], x);
    const double alpha = spec.alphas[c];
    for (double &v : r.data()) v = alpha * 2.0 * v / (1.0 + v * v);
    filter_adjoint_accumulate(spec.kernels[c], r, g);
  }
  return g;
}

HuberTvPrior::HuberTvPrior(double delta) : delta_(delta) {
  if (!(delta > 0.0)) throw ConfigError("huber delta must be > 0");
}

FoEPrior::FoEPrior(FoESpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  // phi'' <= 2 alpha and the padded filter operator norm is <= 2||k||_1
  // (reflection can fold at most two taps onto one input pixel per axis).
  double lip = 0.0;
  for (std::size_t c = 0; c < spec_.kernels.size(); ++c) {
    double l1 = 0.0;
    for (double w : spec_.kernels[c].data()) l1 += std::abs(w);
    lip += 2.0 * spec_.alphas[c] * (2.0 * l1) * (2.0 * l1);
  }
  lipschitz_ = lip;
}

}  // namespace uqband
