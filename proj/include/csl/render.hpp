#pragma once

#include "csl/camera.hpp"
#include "csl/dense_map.hpp"
#include "csl/geom.hpp"

#include <Eigen/Core>

#include <variant>

namespace csl {

struct EmptyScene {};

/// Axis-aligned box centred on the object origin.
struct Box {
  Vec3d half_extents{0.1, 0.1, 0.1};
};

/// Cylinder about the object Z axis, centred on the origin.
struct Cylinder {
  double radius = 0.1;
  double half_height = 0.1;
};

using Shape = std::variant<EmptyScene, Box, Cylinder>;

/// Radius of the bounding sphere about the object origin.
double bounding_radius(const Shape& shape);

struct RenderResult {
  Eigen::ArrayXXd image;  // height x width, intensity in [0, 1], background 0
  PointMap points;        // first-hit object coordinates
};

/// Ray casts `shape` at `pose`. Faces are flat shaded with a constant albedo
/// per face class, chosen so that faces related by the shape's symmetry look
/// the same. Throws std::invalid_argument if the object lies entirely behind
/// the camera.
RenderResult render_scene(const Pose& pose, const Shape& shape, const CameraModel& cam);

}  // namespace csl
