#pragma once

#include "csl/geom.hpp"

namespace csl {

/// Pinhole intrinsics. Pixel (i, j) is column i, row j; its centre is at the
/// integer coordinate.
struct CameraModel {
  double fx = 200.0;
  double fy = 200.0;
  double cx = 80.0;
  double cy = 60.0;
  int width = 160;
  int height = 120;

  /// Throws std::invalid_argument if the invariants do not hold.
  void validate() const;

  bool contains(double i, double j) const {
    return i >= 0 && j >= 0 && i <= width - 1 && j <= height - 1;
  }

  /// Unit viewing ray of pixel (i, j) in the camera frame.
  Vec3d ray(double i, double j) const {
    return Vec3d((i - cx) / fx, (j - cy) / fy, 1.0).normalized();
  }

  Vec2d project(const Vec3d& pc) const {
    return {fx * pc.x() / pc.z() + cx, fy * pc.y() / pc.z() + cy};
  }
};

/// Rotation taking the camera Z axis onto the viewing ray of pixel (i, j).
/// Identity at the principal point.
Mat3d r_ray(double i, double j, const CameraModel& cam);

}  // namespace csl
