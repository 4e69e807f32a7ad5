#include "csl/symmetry.hpp"

#include <cmath>
#include <stdexcept>

namespace csl {

Fold Fold::finite(int n) {
  if (n < 1) throw std::invalid_argument("Fold: order must be >= 1");
  return Fold(n);
}

int Fold::order() const {
  if (is_infinite()) throw std::logic_error("Fold: infinite fold has no finite order");
  return n_;
}

double Fold::theta() const { return is_infinite() ? 0.0 : 2.0 * kPi<double> / n_; }

namespace {

Vec3d checked_unit(const Vec3d& axis) {
  const double len = axis.norm();
  if (!(len > 1e-12) || !axis.allFinite()) throw std::invalid_argument("SymmetrySpec: invalid axis");
  return axis / len;
}

}  // namespace

SymmetrySpec::SymmetrySpec(const Vec3d& axis, Fold fold) : primary_{checked_unit(axis), fold} {}

SymmetrySpec::SymmetrySpec(const Vec3d& axis, Fold fold, const Vec3d& secondary_axis,
                           int secondary_fold)
    : SymmetrySpec(axis, fold) {
  const Vec3d b = checked_unit(secondary_axis);
  if (primary_.axis.cross(b).norm() < 1e-9)
    throw std::invalid_argument("SymmetrySpec: symmetry axes are parallel");
  if (secondary_fold < 1) throw std::invalid_argument("SymmetrySpec: secondary fold must be >= 1");
  if (secondary_fold == 1) return;
  if (secondary_fold != 2 || std::abs(primary_.axis.dot(b)) > 1e-9)
    throw std::invalid_argument(
        "SymmetrySpec: symmetry does not decompose into two axial folds "
        "(secondary axis must be perpendicular and 2-fold)");
  secondary_ = AxisFold{b, Fold::finite(2)};
}

std::vector<Mat3d> SymmetrySpec::discrete_group() const {
  std::vector<Mat3d> out;
  const int n = primary_.fold.is_infinite() ? 1 : primary_.fold.order();
  for (int k = 0; k < n; ++k) out.push_back(axis_angle(k * primary_.fold.theta(), primary_.axis));
  if (secondary_) {
    const Mat3d flip = axis_angle(kPi<double>, secondary_->axis);
    for (int k = 0; k < n; ++k) out.push_back(out[k] * flip);
  }
  return out;
}

Vec2d csl_vector(double alpha, int n) {
  if (n < 1) throw std::invalid_argument("csl_vector: fold must be >= 1");
  const double a = n * alpha;
  return {std::cos(a), std::sin(a)};
}

Vec3d star_point(const Vec3d& p, const Vec3d& axis, Fold fold) {
  const bool z_axis = axis.x() == 0.0 && axis.y() == 0.0 && axis.z() > 0.0;
  const Mat3d frame = z_axis ? Mat3d::Identity() : frame_with_z(axis);
  Cyl3<double> c = cyl<double>(z_axis ? p : Vec3d(frame.transpose() * p));
  c.phi = fold.is_infinite() ? 0.0 : wrap_angle(c.phi * fold.multiplier());
  const Vec3d q = cart(c);
  return z_axis ? q : Vec3d(frame * q);
}

Vec3d SymmetrySpec::secondary_star_axis() const {
  if (!secondary_) throw std::logic_error("SymmetrySpec: no secondary axis");
  // A half turn about an axis at angle psi becomes one about the axis at
  // angle n * psi once the primary angles are multiplied by n.
  return star_point(secondary_->axis, primary_.axis, primary_.fold).normalized();
}

PointMap star_map(const PointMap& map, const SymmetrySpec& spec) {
  const Vec3d second = spec.secondary() ? spec.secondary_star_axis() : Vec3d::UnitZ();
  return map.transformed([&](const Vec3d& p, int, int) {
    Vec3d q = star_point(p, spec.primary().axis, spec.primary().fold);
    if (spec.secondary()) q = star_point(q, second, spec.secondary()->fold);
    return q;
  });
}

Vec3d dash_point(const Vec3d& p_obj, const Mat3d& rotation, double i, double j,
                 const CameraModel& cam) {
  return r_ray(i, j, cam).transpose() * (rotation * p_obj);
}

PointMap dash_map(const PointMap& map, const Pose& pose, const CameraModel& cam) {
  return map.transformed(
      [&](const Vec3d& p, int i, int j) { return dash_point(p, pose.rotation, i, j, cam); });
}

PointMap undash_map(const PointMap& dash, const CameraModel& cam) {
  return dash.transformed([&](const Vec3d& d, int i, int j) { return Vec3d(r_ray(i, j, cam) * d); });
}

}  // namespace csl
