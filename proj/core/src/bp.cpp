#include "uqband/bp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uqband::bp {

LabelSpace LabelSpace::subdivisions(int l) {
  if (l < 1) throw ConfigError("label subdivisions must be >= 1");
  return with_count(l + 1);
}

LabelSpace LabelSpace::with_count(int count) {
  if (count < 2) throw ConfigError("label space needs at least 2 labels");
  LabelSpace s;
  s.values.resize(count);
  for (int k = 0; k < count; ++k)
    s.values[k] = static_cast<double>(k) / static_cast<double>(count - 1);
  return s;
}

MrfModel MrfModel::tv_denoising(const ImageGrid &z, double sigma, double lambda,
                                LabelSpace labels) {
  if (!(sigma > 0.0)) throw ConfigError("mrf sigma must be > 0");
  if (!(lambda > 0.0)) throw ConfigError("mrf lambda must be > 0");
  MrfModel m;
  m.height = z.height();
  m.width = z.width();
  m.labels = std::move(labels);
  m.pairwise_weight = 1.0 / lambda;
  const int count = m.labels.count();
  m.unary.resize(z.size() * count);
  const double w = 1.0 / (2.0 * sigma * sigma);
  for (std::size_t pix = 0; pix < z.size(); ++pix) {
    for (int k = 0; k < count; ++k) {
      const double d = m.labels.values[k] - z[pix];
      m.unary[pix * count + k] = w * d * d;
    }
  }
  return m;
}

namespace {

// Directed messages stored by the direction the message travels:
// msg[FROM_LEFT] at pixel v holds the message from v's left neighbor into v.
enum Direction { FROM_LEFT = 0, FROM_RIGHT = 1, FROM_ABOVE = 2, FROM_BELOW = 3 };

struct MessageBoard {
  int height, width, count;
  // 4 x (height*width) x count, zero-initialized = uniform messages.
  std::vector<double> m;

  MessageBoard(int h, int w, int c)
      : height(h), width(w), count(c),
        m(4 * static_cast<std::size_t>(h) * w * c, 0.0) {}

  double *at(int dir, int pix) {
    return m.data() + (static_cast<std::size_t>(dir) * height * width +
                       static_cast<std::size_t>(pix)) * count;
  }
  const double *at(int dir, int pix) const {
    return m.data() + (static_cast<std::size_t>(dir) * height * width +
                       static_cast<std::size_t>(pix)) * count;
  }
};

// Log-potential of the sender with all incoming messages except the one
// coming back from the receiver.
void gather(const MrfModel &model, const MessageBoard &board, int pix, int exclude_dir,
            double *out) {
  const int count = model.labels.count();
  for (int k = 0; k < count; ++k) out[k] = -model.unary_at(pix, k);
  for (int d = 0; d < 4; ++d) {
    if (d == exclude_dir) continue;
    const double *msg = board.at(d, pix);
    for (int k = 0; k < count; ++k) out[k] += msg[k];
  }
}

// One directed message: out[v] = max-shifted log sum_u exp(a[u] - w |l_u - l_v|).
// The naive O(count^2) sum is kept deliberately; exp(a - amax) is
// precomputed so the inner loop is a plain multiply-add against a shared
// exp(-w |l_u - l_v|) table. If a row underflows entirely, it is redone with
// a per-target shift.
void send_message(const double *a, const std::vector<double> &edist, double step_cost,
                  int count, double damping, double *out) {
  thread_local std::vector<double> ea;
  ea.resize(count);
  double amax = a[0];
  for (int k = 1; k < count; ++k) amax = std::max(amax, a[k]);
  for (int k = 0; k < count; ++k) ea[k] = std::exp(a[k] - amax);

  thread_local std::vector<double> fresh;
  fresh.resize(count);
  double mmax = -std::numeric_limits<double>::infinity();
  for (int v = 0; v < count; ++v) {
    double acc = 0.0;
    for (int u = 0; u < count; ++u) acc += ea[u] * edist[std::abs(u - v)];
    if (acc > 0.0) {
      fresh[v] = std::log(acc);
    } else {
      // Full underflow: redo this entry with its own shift.
      double best = -std::numeric_limits<double>::infinity();
      for (int u = 0; u < count; ++u)
        best = std::max(best, a[u] - amax - step_cost * std::abs(u - v));
      double s = 0.0;
      for (int u = 0; u < count; ++u)
        s += std::exp(a[u] - amax - step_cost * std::abs(u - v) - best);
      fresh[v] = best + std::log(s);
    }
    mmax = std::max(mmax, fresh[v]);
  }
  // Max-shift normalization keeps messages bounded across iterations.
  if (damping > 0.0) {
    for (int v = 0; v < count; ++v)
      out[v] = (1.0 - damping) * (fresh[v] - mmax) + damping * out[v];
  } else {
    for (int v = 0; v < count; ++v) out[v] = fresh[v] - mmax;
  }
}

}  // namespace

Marginals bp_sweep(const MrfModel &model, int iterations, double damping) {
  if (iterations < 1) throw ConfigError("bp iterations must be >= 1");
  if (!(damping >= 0.0 && damping < 1.0)) throw ConfigError("bp damping must be in [0,1)");
  const int h = model.height, w = model.width, count = model.labels.count();
  MessageBoard board(h, w, count);

  // exp(-w * |l_u - l_v|) depends only on the index distance.
  std::vector<double> edist(count);
  const double step_cost = model.pairwise_weight * model.labels.spacing();
  for (int d = 0; d < count; ++d) edist[d] = std::exp(-step_cost * d);

  std::vector<double> a(count);
  auto idx = [w](int i, int j) { return i * w + j; };

  for (int it = 0; it < iterations; ++it) {
    // left -> right: update the message into (i,j) from (i,j-1).
    for (int j = 1; j < w; ++j)
      for (int i = 0; i < h; ++i) {
        gather(model, board, idx(i, j - 1), FROM_RIGHT, a.data());
        send_message(a.data(), edist, step_cost, count, damping, board.at(FROM_LEFT, idx(i, j)));
      }
    // right -> left
    for (int j = w - 2; j >= 0; --j)
      for (int i = 0; i < h; ++i) {
        gather(model, board, idx(i, j + 1), FROM_LEFT, a.data());
        send_message(a.data(), edist, step_cost, count, damping, board.at(FROM_RIGHT, idx(i, j)));
      }
    // top -> bottom
    for (int i = 1; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        gather(model, board, idx(i - 1, j), FROM_BELOW, a.data());
        send_message(a.data(), edist, step_cost, count, damping, board.at(FROM_ABOVE, idx(i, j)));
      }
    // bottom -> top
    for (int i = h - 2; i >= 0; --i)
      for (int j = 0; j < w; ++j) {
        gather(model, board, idx(i + 1, j), FROM_ABOVE, a.data());
        send_message(a.data(), edist, step_cost, count, damping, board.at(FROM_BELOW, idx(i, j)));
      }
  }

  Marginals marg;
  marg.height = h;
  marg.width = w;
  marg.label_count = count;
  marg.p.resize(static_cast<std::size_t>(h) * w * count);
  for (int pix = 0; pix < h * w; ++pix) {
    gather(model, board, pix, -1, a.data());
    double amax = a[0];
    for (int k = 1; k < count; ++k) amax = std::max(amax, a[k]);
    double z = 0.0;
    for (int k = 0; k < count; ++k) {
      const double e = std::exp(a[k] - amax);
      marg.p[static_cast<std::size_t>(pix) * count + k] = e;
      z += e;
    }
    const double inv = 1.0 / z;
    for (int k = 0; k < count; ++k) marg.p[static_cast<std::size_t>(pix) * count + k] *= inv;
  }
  return marg;
}

std::pair<ImageGrid, ImageGrid> bp_moments(const Marginals &marg, const LabelSpace &labels) {
  if (marg.label_count != labels.count())
    throw ShapeError("bp_moments: marginals/label space size mismatch");
  ImageGrid mean(marg.height, marg.width);
  ImageGrid var(marg.height, marg.width);
  for (int pix = 0; pix < marg.height * marg.width; ++pix) {
    double m = 0.0;
    for (int k = 0; k < marg.label_count; ++k) m += labels.values[k] * marg.at(pix, k);
    double v = 0.0;
    for (int k = 0; k < marg.label_count; ++k) {
      const double d = labels.values[k] - m;
      v += d * d * marg.at(pix, k);
    }
    mean[pix] = m;
    var[pix] = v;
  }
  return {std::move(mean), std::move(var)};
}

std::pair<double, double> compare_to_chain(const ImageGrid &bp_mean, const ImageGrid &bp_var,
                                           const ChainStats &chain) {
  return {mean_abs_diff(bp_mean, chain.mean), mean_abs_diff(bp_var, chain.variance())};
}

ImageGrid marginal_slice(const Marginals &marg, int label) {
  if (label < 0 || label >= marg.label_count)
    throw ConfigError("marginal_slice: label out of range");
  ImageGrid g(marg.height, marg.width);
  for (int pix = 0; pix < marg.height * marg.width; ++pix) g[pix] = marg.at(pix, label);
  return g;
}

}  // namespace uqband::bp
