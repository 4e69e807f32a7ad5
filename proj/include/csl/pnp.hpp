#pragma once

#include "csl/camera.hpp"
#include "csl/dense_map.hpp"
#include "csl/errors.hpp"
#include "csl/geom.hpp"
#include "csl/symmetry.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace csl {

struct Correspondence {
  Vec2d pixel;   // (i, j)
  Vec3d object;  // object coordinates
};

struct Correspondences {
  std::vector<Correspondence> items;
  CameraModel camera;
};

/// One correspondence per valid pixel of an object point map.
Correspondences correspondences_from_map(const PointMap& points, const CameraModel& cam);

struct PnpOptions {
  int max_iterations = 100;
  double step_tolerance = 1e-10;
  double initial_damping = 1e-3;
};

struct PnpResult {
  Pose pose;
  double initial_rms = 0;  // reprojection RMS at the initialization, pixels
  double final_rms = 0;
  int iterations = 0;
};

/// Raised when the refinement does not converge; carries the last residual.
class PnpError : public std::runtime_error {
 public:
  PnpError(const std::string& what, double rms) : std::runtime_error(what), rms_(rms) {}
  double rms() const { return rms_; }

 private:
  double rms_;
};

/// Linear initialization: DLT for general point sets, a homography for planar
/// ones. Throws DegenerateError for collinear or too few points.
Pose initial_pose(const Correspondences& corr);

/// Levenberg-Marquardt refinement of the reprojection error over a rotation
/// vector update and translation, from `init` or the linear initialization.
PnpResult solve_pnp(const Correspondences& corr, const std::optional<Pose>& init = std::nullopt,
                    const PnpOptions& options = {});

double reprojection_rms(const Correspondences& corr, const Pose& pose);

struct PoseError {
  double rotation;     // radians
  double translation;  // meters
};

/// Rotation error is the smallest geodesic distance from the estimate to any
/// symmetric equivalent of the ground truth; for a continuous fold the
/// rotation about the axis is ignored.
PoseError sym_pose_error(const Pose& estimate, const Pose& truth, const SymmetrySpec& spec);

}  // namespace csl
