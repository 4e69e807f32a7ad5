#include "csl/render.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace csl {

namespace {

struct Hit {
  double t;
  double albedo;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

std::optional<Hit> intersect(const EmptyScene&, const Vec3d&, const Vec3d&) { return std::nullopt; }

std::optional<Hit> intersect(const Box& box, const Vec3d& o, const Vec3d& d) {
  const Vec3d& h = box.half_extents;
  double t_near = -kInf, t_far = kInf;
  int face_axis = -1;
  double face_sign = 0;
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (std::abs(o[a]) > h[a]) return std::nullopt;
      continue;
    }
    double t0 = (-h[a] - o[a]) / d[a];
    double t1 = (h[a] - o[a]) / d[a];
    // Entering through the face whose outward normal opposes the ray.
    const double sign = d[a] > 0 ? -1.0 : 1.0;
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_near) {
      t_near = t0;
      face_axis = a;
      face_sign = sign;
    }
    t_far = std::min(t_far, t1);
  }
  if (t_near > t_far || t_near <= 0.0 || face_axis < 0) return std::nullopt;
  double albedo = 0.6;
  if (face_axis == 1 && h.x() != h.y()) albedo = 0.45;
  if (face_axis == 2) albedo = face_sign > 0 ? 0.9 : 0.3;
  return Hit{t_near, albedo};
}

std::optional<Hit> intersect(const Cylinder& cylinder, const Vec3d& o, const Vec3d& d) {
  const double r = cylinder.radius, h = cylinder.half_height;
  std::optional<Hit> best;
  auto consider = [&](double t, double albedo) {
    if (t > 0.0 && (!best || t < best->t)) best = Hit{t, albedo};
  };
  const double a = d.x() * d.x() + d.y() * d.y();
  if (a > 0.0) {
    const double b = o.x() * d.x() + o.y() * d.y();
    const double c = o.x() * o.x() + o.y() * o.y() - r * r;
    const double disc = b * b - a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / a, (-b + sq) / a})
        if (std::abs(o.z() + t * d.z()) <= h) consider(t, 0.6);
    }
  }
  if (d.z() != 0.0) {
    for (double zc : {h, -h}) {
      const double t = (zc - o.z()) / d.z();
      const Vec3d p = o + t * d;
      if (p.x() * p.x() + p.y() * p.y() <= r * r) consider(t, zc > 0 ? 0.9 : 0.3);
    }
  }
  return best;
}

}  // namespace

double bounding_radius(const Shape& shape) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Box>) return s.half_extents.norm();
        else if constexpr (std::is_same_v<T, Cylinder>) return std::hypot(s.radius, s.half_height);
        else return 0.0;
      },
      shape);
}

RenderResult render_scene(const Pose& pose, const Shape& shape, const CameraModel& cam) {
  cam.validate();
  if (!std::holds_alternative<EmptyScene>(shape) &&
      pose.translation.z() + bounding_radius(shape) <= 0.0)
    throw std::invalid_argument("render_scene: object is behind the camera");

  RenderResult out{Eigen::ArrayXXd::Zero(cam.height, cam.width), PointMap(cam.width, cam.height)};
  const Mat3d rt = pose.rotation.transpose();
  const Vec3d origin = -(rt * pose.translation);
  for (int j = 0; j < cam.height; ++j) {
    for (int i = 0; i < cam.width; ++i) {
      const Vec3d dir = rt * cam.ray(i, j);
      const auto hit = std::visit([&](const auto& s) { return intersect(s, origin, dir); }, shape);
      if (!hit) continue;
      out.image(j, i) = hit->albedo;
      out.points.set(i, j, origin + hit->t * dir);
    }
  }
  return out;
}

}  // namespace csl
