#pragma once

#include "csl/camera.hpp"
#include "csl/dense_map.hpp"
#include "csl/geom.hpp"

#include <optional>
#include <vector>

namespace csl {

/// Order of a rotational symmetry: a finite n >= 1 or the continuous case.
class Fold {
 public:
  static Fold finite(int n);
  static Fold infinite() { return Fold(0); }

  bool is_infinite() const { return n_ == 0; }
  /// Throws std::logic_error for the infinite fold.
  int order() const;
  /// Factor applied to the angle about the axis: n, or 0 for the infinite fold.
  double multiplier() const { return static_cast<double>(n_); }
  /// 2*pi/n; zero for the infinite fold.
  double theta() const;

  bool operator==(const Fold&) const = default;

 private:
  explicit Fold(int n) : n_(n) {}
  int n_;
};

struct AxisFold {
  Vec3d axis = Vec3d::UnitZ();
  Fold fold = Fold::finite(1);
};

/// A symmetry axis with its fold, optionally composed with a second axis.
///
/// The second axis must be perpendicular to the first and carry a 2-fold
/// symmetry. Anything else (four-fold about two axes, as for a cube) does not
/// decompose into two sequential star transforms and is rejected.
class SymmetrySpec {
 public:
  SymmetrySpec() = default;
  SymmetrySpec(const Vec3d& axis, Fold fold);
  SymmetrySpec(const Vec3d& axis, Fold fold, const Vec3d& secondary_axis, int secondary_fold);

  const AxisFold& primary() const { return primary_; }
  const std::optional<AxisFold>& secondary() const { return secondary_; }
  bool is_continuous() const { return primary_.fold.is_infinite(); }

  /// Discrete rotations of the symmetry group. For a continuous primary fold
  /// this is the discrete part only; the rotations about the primary axis are
  /// implied.
  std::vector<Mat3d> discrete_group() const;

  /// The secondary axis as seen after the primary star transform, which is
  /// where the second transform is applied. Throws without a secondary axis.
  Vec3d secondary_star_axis() const;

 private:
  AxisFold primary_;
  std::optional<AxisFold> secondary_;
};

/// Unit vector at angle n * alpha.
Vec2d csl_vector(double alpha, int n);

/// Multiplies the angle of `p` about `axis` by the fold multiplier. Radius and
/// axial component are preserved.
Vec3d star_point(const Vec3d& p, const Vec3d& axis, Fold fold);

/// Star transform of every valid pixel; with a secondary axis the transform is
/// applied again to the first result, about secondary_star_axis().
PointMap star_map(const PointMap& map, const SymmetrySpec& spec);

/// Object point rotated into the camera frame, then by the inverse viewing-ray
/// rotation of its pixel.
Vec3d dash_point(const Vec3d& p_obj, const Mat3d& rotation, double i, double j,
                 const CameraModel& cam);

PointMap dash_map(const PointMap& map, const Pose& pose, const CameraModel& cam);

/// Undoes the per-pixel ray rotation of a dash map, giving the object points
/// rotated into the camera frame (without translation).
PointMap undash_map(const PointMap& dash, const CameraModel& cam);

}  // namespace csl
