#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "uqband/errors.hpp"

namespace uqband {

/// 2D scalar field, row-major, double precision. Values are nominally
/// gray scale intensities in [0,1] but the container itself is unit-free;
/// it also holds error maps, variance maps and the like.
class ImageGrid {
 public:
  ImageGrid() = default;
  ImageGrid(int height, int width, double fill = 0.0);
  static ImageGrid from_data(int height, int width, std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double &at(int i, int j) { return data_[static_cast<std::size_t>(i) * width_ + j]; }
  double at(int i, int j) const { return data_[static_cast<std::size_t>(i) * width_ + j]; }
  double &operator[](std::size_t k) { return data_[k]; }
  double operator[](std::size_t k) const { return data_[k]; }

  std::vector<double> &data() { return data_; }
  const std::vector<double> &data() const { return data_; }

  bool same_shape(const ImageGrid &other) const {
    return height_ == other.height_ && width_ == other.width_;
  }
  bool all_finite() const;

  double min() const;
  double max() const;
  double mean() const;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

/// Throws ShapeError unless a and b have identical dimensions.
void require_same_shape(const ImageGrid &a, const ImageGrid &b, const std::string &what);

/// Mean absolute difference (1/MN) sum |a_ij - b_ij|.
double mean_abs_diff(const ImageGrid &a, const ImageGrid &b);

}  // namespace uqband
