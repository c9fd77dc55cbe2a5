#include "uqband/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace uqband {

double psnr(const ImageGrid &reference, const ImageGrid &candidate) {
  require_same_shape(reference, candidate, "psnr");
  double mse = 0.0;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    const double d = reference[k] - candidate[k];
    mse += d * d;
  }
  mse /= static_cast<double>(reference.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::vector<double> gaussian_window() {
  std::vector<double> w(kWin * kWin);
  const int r = kWin / 2;
  double sum = 0.0;
  for (int a = -r; a <= r; ++a)
    for (int b = -r; b <= r; ++b) {
      const double v = std::exp(-(a * a + b * b) / (2.0 * kSigma * kSigma));
      w[(a + r) * kWin + (b + r)] = v;
      sum += v;
    }
  for (double &v : w) v /= sum;
  return w;
}

double ssim_term(double mx, double my, double vx, double vy, double cxy) {
  return ((2.0 * mx * my + kC1) * (2.0 * cxy + kC2)) /
         ((mx * mx + my * my + kC1) * (vx + vy + kC2));
}

// Windowed moments against weights w at top-left corner (i0,j0), side n.
double window_ssim(const ImageGrid &x, const ImageGrid &y, const std::vector<double> &w,
                   int i0, int j0, int n) {
  double mx = 0.0, my = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double wk = w[a * n + b];
      mx += wk * x.at(i0 + a, j0 + b);
      my += wk * y.at(i0 + a, j0 + b);
    }
  double vx = 0.0, vy = 0.0, cxy = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double wk = w[a * n + b];
      const double dx = x.at(i0 + a, j0 + b) - mx;
      const double dy = y.at(i0 + a, j0 + b) - my;
      vx += wk * dx * dx;
      vy += wk * dy * dy;
      cxy += wk * dx * dy;
    }
  return ssim_term(mx, my, vx, vy, cxy);
}

}  // namespace

double ssim(const ImageGrid &reference, const ImageGrid &candidate) {
  require_same_shape(reference, candidate, "ssim");
  const int h = reference.height(), w = reference.width();
  if (h < kWin || w < kWin) {
    // Single uniform global window for tiny images.
    const double n = static_cast<double>(reference.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < reference.size(); ++k) {
      mx += reference[k];
      my += candidate[k];
    }
    mx /= n;
    my /= n;
    double vx = 0.0, vy = 0.0, cxy = 0.0;
    for (std::size_t k = 0; k < reference.size(); ++k) {
      const double dx = reference[k] - mx;
      const double dy = candidate[k] - my;
      vx += dx * dx;
      vy += dy * dy;
      cxy += dx * dy;
    }
    return ssim_term(mx, my, vx / n, vy / n, cxy / n);
  }

  static const std::vector<double> win = gaussian_window();
  double acc = 0.0;
  long count = 0;
  for (int i = 0; i + kWin <= h; ++i)
    for (int j = 0; j + kWin <= w; ++j) {
      acc += window_ssim(reference, candidate, win, i, j, kWin);
      ++count;
    }
  return acc / static_cast<double>(count);
}

}  // namespace uqband
