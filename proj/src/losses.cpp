#include "csl/losses.hpp"

#include <algorithm>
#include <cmath>

namespace csl::losses {

Theta::Theta(double value) : value_(value) {
  if (!(value > 0.0) || value > 2.0 * kPi<double> * (1 + 1e-12))
    throw std::invalid_argument("Theta: must lie in (0, 2*pi]");
}

Theta Theta::from_fold(int n) {
  if (n < 1) throw std::invalid_argument("Theta: fold must be >= 1");
  return Theta(2.0 * kPi<double> / n);
}

int Theta::fold() const {
  const double n = 2.0 * kPi<double> / value_;
  const double r = std::round(n);
  if (std::abs(n - r) > 1e-9 * r) throw std::invalid_argument("Theta: not of the form 2*pi/n");
  return static_cast<int>(r);
}

double ae(double y, double y_hat) { return std::abs(y - y_hat); }

double ae_grad(double y, double y_hat) {
  if (y_hat > y) return 1.0;
  if (y_hat < y) return -1.0;
  return 0.0;
}

double vec_ae(const Vec2d& y, const Vec2d& y_hat) { return (y - y_hat).norm(); }

Vec2d vec_ae_grad(const Vec2d& y, const Vec2d& y_hat) {
  return detail::unit_or_zero<2>(y_hat - y);
}

long mos_ae_branch(double y, double y_hat, Theta theta) {
  // |d + k*theta| is minimized by one of the two integers around -d/theta.
  const double d = y - y_hat;
  const long k0 = static_cast<long>(std::floor(-d / theta.value()));
  const double e0 = std::abs(d + k0 * theta.value());
  const double e1 = std::abs(d + (k0 + 1) * theta.value());
  return e1 < e0 ? k0 + 1 : k0;
}

double mos_ae(double y, double y_hat, Theta theta) {
  const long k = mos_ae_branch(y, y_hat, theta);
  // The exact minimum never exceeds theta/2; clamp away the rounding.
  return std::min(std::abs(y - y_hat + k * theta.value()), 0.5 * theta.value());
}

double mos_ae_grad(double y, double y_hat, Theta theta) {
  const long k = mos_ae_branch(y, y_hat, theta);
  return ae_grad(y + k * theta.value(), y_hat);
}

RotationSet<2> symmetry_rotations(Theta theta) {
  RotationSet<2> out;
  for (int k = 0; k < theta.fold(); ++k) out.push_back(rot2(k * theta.value()));
  return out;
}

RotationSet<3> symmetry_rotations(Theta theta, const Vec3d& axis) {
  RotationSet<3> out;
  for (int k = 0; k < theta.fold(); ++k) out.push_back(axis_angle(k * theta.value(), axis));
  return out;
}

double vec_mos_ae(const Vec2d& y, const Vec2d& y_hat, Theta theta) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : symmetry_rotations(theta)) best = std::min(best, (r * y - y_hat).norm());
  return best;
}

Vec2d vec_mos_ae_grad(const Vec2d& y, const Vec2d& y_hat, Theta theta) {
  const auto rots = symmetry_rotations(theta);
  const auto& r = rots[detail::best_rotation<2>(rots, y, y_hat)];
  return detail::unit_or_zero<2>(y_hat - r * y);
}

}  // namespace csl::losses
