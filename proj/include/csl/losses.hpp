#pragma once

#include "csl/dense_map.hpp"
#include "csl/geom.hpp"

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

// Representation losses for symmetric targets. Every loss comes with the
// gradient with respect to the prediction. Min-over-symmetries losses take the
// subgradient of the active branch; ties go to the smallest k.
namespace csl::losses {

/// Symmetry angle 2*pi/n.
class Theta {
 public:
  explicit Theta(double value);
  static Theta from_fold(int n);

  double value() const { return value_; }
  /// The n with value == 2*pi/n; throws if there is none.
  int fold() const;

 private:
  double value_;
};

// Absolute error |y - y_hat|.
double ae(double y, double y_hat);
double ae_grad(double y, double y_hat);

// Euclidean error |y - y_hat| for vectors; zero subgradient at equality.
double vec_ae(const Vec2d& y, const Vec2d& y_hat);
Vec2d vec_ae_grad(const Vec2d& y, const Vec2d& y_hat);

/// min over integer k of |y - y_hat + k*theta|, in [0, theta/2].
double mos_ae(double y, double y_hat, Theta theta);
double mos_ae_grad(double y, double y_hat, Theta theta);
/// The minimizing k (smallest on ties).
long mos_ae_branch(double y, double y_hat, Theta theta);

/// min over k in [0, n) of |Rot(k*theta) y - y_hat|.
double vec_mos_ae(const Vec2d& y, const Vec2d& y_hat, Theta theta);
Vec2d vec_mos_ae_grad(const Vec2d& y, const Vec2d& y_hat, Theta theta);

template <int D> using RotationMatrix = Eigen::Matrix<double, D, D>;
template <int D>
using RotationSet = std::vector<RotationMatrix<D>, Eigen::aligned_allocator<RotationMatrix<D>>>;

/// Rot(k*theta), k = 0..n-1, in the plane.
RotationSet<2> symmetry_rotations(Theta theta);
/// Rotations by k*theta about `axis`, k = 0..n-1.
RotationSet<3> symmetry_rotations(Theta theta, const Vec3d& axis);

namespace detail {

template <int D>
std::vector<std::size_t> shared_pixels(const DenseMap<D>& y, const DenseMap<D>& y_hat) {
  if (!y.same_shape(y_hat)) throw std::invalid_argument("loss: maps differ in shape");
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < y.size(); ++k)
    if (y.valid(k) && y_hat.valid(k)) idx.push_back(k);
  if (idx.empty()) throw std::invalid_argument("loss: no valid pixels");
  return idx;
}

template <int D> Eigen::Matrix<double, D, 1> unit_or_zero(const Eigen::Matrix<double, D, 1>& e) {
  const double n = e.norm();
  return n > 0 ? Eigen::Matrix<double, D, 1>(e / n) : Eigen::Matrix<double, D, 1>::Zero();
}

template <int D> std::size_t best_rotation(const RotationSet<D>& rots,
                                           const Eigen::Matrix<double, D, 1>& y,
                                           const Eigen::Matrix<double, D, 1>& y_hat) {
  std::size_t best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rots.size(); ++k) {
    const double err = (rots[k] * y - y_hat).norm();
    if (err < best_err) {
      best_err = err;
      best = k;
    }
  }
  return best;
}

}  // namespace detail

/// Mean Euclidean error over pixels valid in both maps.
template <int D> double mae(const DenseMap<D>& y, const DenseMap<D>& y_hat) {
  const auto idx = detail::shared_pixels(y, y_hat);
  double sum = 0;
  for (auto k : idx) sum += (y[k] - y_hat[k]).norm();
  return sum / static_cast<double>(idx.size());
}

template <int D> DenseMap<D> mae_grad(const DenseMap<D>& y, const DenseMap<D>& y_hat) {
  const auto idx = detail::shared_pixels(y, y_hat);
  DenseMap<D> g(y.width(), y.height());
  const double inv_m = 1.0 / static_cast<double>(idx.size());
  for (auto k : idx) g.set(k, inv_m * detail::unit_or_zero<D>(y_hat[k] - y[k]));
  return g;
}

/// Mean over pixels of the per-pixel minimum over symmetric equivalents.
template <int D>
double pmos_mae(const DenseMap<D>& y, const DenseMap<D>& y_hat, const RotationSet<D>& rots) {
  const auto idx = detail::shared_pixels(y, y_hat);
  double sum = 0;
  for (auto k : idx) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : rots) best = std::min(best, (r * y[k] - y_hat[k]).norm());
    sum += best;
  }
  return sum / static_cast<double>(idx.size());
}

template <int D>
DenseMap<D> pmos_mae_grad(const DenseMap<D>& y, const DenseMap<D>& y_hat,
                          const RotationSet<D>& rots) {
  const auto idx = detail::shared_pixels(y, y_hat);
  DenseMap<D> g(y.width(), y.height());
  const double inv_m = 1.0 / static_cast<double>(idx.size());
  for (auto k : idx) {
    const auto& r = rots[detail::best_rotation<D>(rots, y[k], y_hat[k])];
    g.set(k, inv_m * detail::unit_or_zero<D>(y_hat[k] - r * y[k]));
  }
  return g;
}

/// Index of the single rotation minimizing the mean error over the image.
template <int D>
std::size_t imos_branch(const DenseMap<D>& y, const DenseMap<D>& y_hat, const RotationSet<D>& rots) {
  const auto idx = detail::shared_pixels(y, y_hat);
  std::size_t best = 0;
  double best_sum = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < rots.size(); ++r) {
    double sum = 0;
    for (auto k : idx) sum += (rots[r] * y[k] - y_hat[k]).norm();
    if (sum < best_sum) {
      best_sum = sum;
      best = r;
    }
  }
  return best;
}

/// Minimum over one global symmetric equivalent of the mean error.
template <int D>
double imos_mae(const DenseMap<D>& y, const DenseMap<D>& y_hat, const RotationSet<D>& rots) {
  const auto idx = detail::shared_pixels(y, y_hat);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : rots) {
    double sum = 0;
    for (auto k : idx) sum += (r * y[k] - y_hat[k]).norm();
    best = std::min(best, sum);
  }
  return best / static_cast<double>(idx.size());
}

template <int D>
DenseMap<D> imos_mae_grad(const DenseMap<D>& y, const DenseMap<D>& y_hat,
                          const RotationSet<D>& rots) {
  const auto idx = detail::shared_pixels(y, y_hat);
  const auto& r = rots[imos_branch<D>(y, y_hat, rots)];
  DenseMap<D> g(y.width(), y.height());
  const double inv_m = 1.0 / static_cast<double>(idx.size());
  for (auto k : idx) g.set(k, inv_m * detail::unit_or_zero<D>(y_hat[k] - r * y[k]));
  return g;
}

}  // namespace csl::losses
