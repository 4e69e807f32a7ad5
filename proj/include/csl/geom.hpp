#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace csl {

template <typename Scalar> using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar> using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

using Vec2d = Vec2<double>;
using Vec3d = Vec3<double>;
using Mat2d = Mat2<double>;
using Mat3d = Mat3<double>;

template <typename Scalar> inline constexpr Scalar kPi = std::numbers::pi_v<Scalar>;

/// Polar coordinates, phi in (-pi, pi], rho >= 0.
template <typename Scalar> struct Polar2 {
  Scalar phi{0};
  Scalar rho{0};
};

/// Cylindrical coordinates about the Z axis, phi in (-pi, pi], rho >= 0.
template <typename Scalar> struct Cyl3 {
  Scalar phi{0};
  Scalar rho{0};
  Scalar z{0};
};

/// Rigid transform mapping object coordinates into the camera frame.
struct Pose {
  Mat3d rotation = Mat3d::Identity();
  Vec3d translation = Vec3d::Zero();

  Vec3d operator*(const Vec3d& p) const { return rotation * p + translation; }
};

/// Wraps an angle into (-pi, pi].
template <typename Scalar> Scalar wrap_angle(Scalar a) {
  const Scalar two_pi = 2 * kPi<Scalar>;
  a = std::fmod(a, two_pi);
  if (a <= -kPi<Scalar>) a += two_pi;
  if (a > kPi<Scalar>) a -= two_pi;
  return a;
}

// atan2 returns -pi for (-x, -0.0); fold that onto the +pi end of the branch.
template <typename Scalar> Scalar canonical_atan2(Scalar y, Scalar x) {
  Scalar phi = std::atan2(y, x);
  if (phi <= -kPi<Scalar>) phi = kPi<Scalar>;
  return phi;
}

/// The zero vector maps to (0, 0).
template <typename Scalar> Polar2<Scalar> pol2(const Vec2<Scalar>& v) {
  const Scalar rho = v.norm();
  if (rho == Scalar(0)) return {Scalar(0), Scalar(0)};
  return {canonical_atan2(v.y(), v.x()), rho};
}

template <typename Scalar> Vec2<Scalar> cart2(const Polar2<Scalar>& p) {
  return {p.rho * std::cos(p.phi), p.rho * std::sin(p.phi)};
}

/// On-axis points get phi = 0.
template <typename Scalar> Cyl3<Scalar> cyl(const Vec3<Scalar>& v) {
  const Scalar rho = std::hypot(v.x(), v.y());
  if (rho == Scalar(0)) return {Scalar(0), Scalar(0), v.z()};
  return {canonical_atan2(v.y(), v.x()), rho, v.z()};
}

template <typename Scalar> Vec3<Scalar> cart(const Cyl3<Scalar>& c) {
  return {c.rho * std::cos(c.phi), c.rho * std::sin(c.phi), c.z};
}

template <typename Scalar> Mat2<Scalar> rot2(Scalar phi) {
  const Scalar c = std::cos(phi), s = std::sin(phi);
  Mat2<Scalar> r;
  r << c, -s, s, c;
  return r;
}

template <typename Scalar> Mat3<Scalar> rot_z(Scalar phi) {
  const Scalar c = std::cos(phi), s = std::sin(phi);
  Mat3<Scalar> r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

/// Rotation by `angle` about `axis` (normalized internally). Throws on a zero
/// axis unless the angle is zero.
template <typename Scalar> Mat3<Scalar> axis_angle(Scalar angle, const Vec3<Scalar>& axis) {
  if (angle == Scalar(0)) return Mat3<Scalar>::Identity();
  const Scalar len = axis.norm();
  if (!(len > Scalar(0))) throw std::invalid_argument("axis_angle: zero rotation axis");
  return Eigen::AngleAxis<Scalar>(angle, axis / len).toRotationMatrix();
}

/// Rotation for a rotation vector (axis * angle).
template <typename Scalar> Mat3<Scalar> exp_so3(const Vec3<Scalar>& w) {
  const Scalar angle = w.norm();
  if (angle == Scalar(0)) return Mat3<Scalar>::Identity();
  return Eigen::AngleAxis<Scalar>(angle, w / angle).toRotationMatrix();
}

/// Angle in [0, pi] between two nonzero vectors.
template <typename Scalar> Scalar angle_between(const Vec3<Scalar>& u, const Vec3<Scalar>& v) {
  const Scalar nu = u.norm(), nv = v.norm();
  if (!(nu > Scalar(0)) || !(nv > Scalar(0)))
    throw std::invalid_argument("angle_between: zero-length vector");
  const Scalar c = std::clamp(u.dot(v) / (nu * nv), Scalar(-1), Scalar(1));
  return std::acos(c);
}

/// Geodesic distance on SO(3), in [0, pi].
template <typename Scalar> Scalar rotation_distance(const Mat3<Scalar>& a, const Mat3<Scalar>& b) {
  const Mat3<Scalar> d = a.transpose() * b;
  const Vec3<Scalar> v(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1));
  return std::atan2(v.norm() / Scalar(2), (d.trace() - Scalar(1)) / Scalar(2));
}

/// A rotation whose third column is `axis`, i.e. it maps Z onto `axis`.
template <typename Scalar> Mat3<Scalar> frame_with_z(const Vec3<Scalar>& axis) {
  const Vec3<Scalar> z = axis.normalized();
  const Vec3<Scalar> helper =
      std::abs(z.x()) < Scalar(0.9) ? Vec3<Scalar>::UnitX() : Vec3<Scalar>::UnitY();
  const Vec3<Scalar> x = (helper - helper.dot(z) * z).normalized();
  Mat3<Scalar> f;
  f.col(0) = x;
  f.col(1) = z.cross(x);
  f.col(2) = z;
  return f;
}

/// Nearest rotation in Frobenius norm.
Mat3d project_to_rotation(const Mat3d& m);

bool is_rotation(const Mat3d& r, double tol = 1e-9);

}  // namespace csl
