#include "csl/camera.hpp"

#include <stdexcept>

namespace csl {

void CameraModel::validate() const {
  if (!(fx > 0) || !(fy > 0)) throw std::invalid_argument("camera: focal lengths must be positive");
  if (width < 1 || height < 1) throw std::invalid_argument("camera: empty image");
  if (!contains(cx, cy)) throw std::invalid_argument("camera: principal point outside the image");
}

Mat3d r_ray(double i, double j, const CameraModel& cam) {
  const Vec3d z = Vec3d::UnitZ();
  const Vec3d ray = cam.ray(i, j);
  const Vec3d axis = z.cross(ray);
  const double s = axis.norm();
  if (s == 0.0) return Mat3d::Identity();
  return axis_angle(std::atan2(s, z.dot(ray)), axis);
}

}  // namespace csl
