#include "uqband/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace uqband {

ImageGrid::ImageGrid(int height, int width, double fill)
    : height_(height), width_(width) {
  if (height <= 0 || width <= 0)
    throw ConfigError("ImageGrid dimensions must be positive, got " +
                      std::to_string(height) + "x" + std::to_string(width));
  data_.assign(static_cast<std::size_t>(height) * width, fill);
}

ImageGrid ImageGrid::from_data(int height, int width, std::vector<double> data) {
  ImageGrid g(height, width);
  if (data.size() != g.size())
    throw ShapeError("ImageGrid data length " + std::to_string(data.size()) +
                     " does not match " + std::to_string(height) + "x" +
                     std::to_string(width));
  g.data_ = std::move(data);
  return g;
}

bool ImageGrid::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

double ImageGrid::min() const {
  return *std::min_element(data_.begin(), data_.end());
}

double ImageGrid::max() const {
  return *std::max_element(data_.begin(), data_.end());
}

double ImageGrid::mean() const {
  if (data_.empty()) return 0.0;
  return std::accumulate(data_.begin(), data_.end(), 0.0) / data_.size();
}

void require_same_shape(const ImageGrid &a, const ImageGrid &b, const std::string &what) {
  if (!a.same_shape(b))
    throw ShapeError(what + ": shape mismatch, " + std::to_string(a.height()) + "x" +
                     std::to_string(a.width()) + " vs " + std::to_string(b.height()) +
                     "x" + std::to_string(b.width()));
}

double mean_abs_diff(const ImageGrid &a, const ImageGrid &b) {
  require_same_shape(a, b, "mean_abs_diff");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += std::abs(a[k] - b[k]);
  return acc / static_cast<double>(a.size());
}

}  // namespace uqband
