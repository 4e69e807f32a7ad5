#pragma once

#include "csl/geom.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace csl {

/// Row-major W x H grid of D-vectors with a validity mask. Invalid entries
/// hold zero.
template <int D> class DenseMap {
 public:
  using Value = Eigen::Matrix<double, D, 1>;

  DenseMap() = default;
  DenseMap(int width, int height)
      : width_(width), height_(height),
        values_(static_cast<std::size_t>(width) * height, Value::Zero()),
        mask_(static_cast<std::size_t>(width) * height, 0) {
    if (width < 0 || height < 0) throw std::invalid_argument("DenseMap: negative size");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * width_ + i; }

  bool valid(std::size_t k) const { return mask_[k] != 0; }
  bool valid(int i, int j) const { return valid(index(i, j)); }
  const Value& operator[](std::size_t k) const { return values_[k]; }
  const Value& at(int i, int j) const { return values_[index(i, j)]; }

  void set(std::size_t k, const Value& v) {
    values_[k] = v;
    mask_[k] = 1;
  }
  void set(int i, int j, const Value& v) { set(index(i, j), v); }
  void clear(std::size_t k) {
    values_[k] = Value::Zero();
    mask_[k] = 0;
  }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (auto m : mask_) n += m != 0;
    return n;
  }
  std::vector<std::size_t> valid_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < mask_.size(); ++k)
      if (mask_[k]) out.push_back(k);
    return out;
  }

  bool same_shape(const DenseMap& o) const { return width_ == o.width_ && height_ == o.height_; }
  bool same_mask(const DenseMap& o) const { return same_shape(o) && mask_ == o.mask_; }

  /// Applies `fn(value, i, j)` to every valid entry, keeping the mask.
  template <typename Fn> DenseMap transformed(Fn&& fn) const {
    DenseMap out(width_, height_);
    for (int j = 0; j < height_; ++j)
      for (int i = 0; i < width_; ++i) {
        const std::size_t k = index(i, j);
        if (mask_[k]) out.set(k, fn(values_[k], i, j));
      }
    return out;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Value, Eigen::aligned_allocator<Value>> values_;
  std::vector<std::uint8_t> mask_;
};

/// Per-pixel 3D object coordinates.
using PointMap = DenseMap<3>;

}  // namespace csl
