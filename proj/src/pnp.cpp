#include "csl/pnp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace csl {

namespace {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

Mat3d skew(const Vec3d& v) {
  Mat3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Vec2d normalized(const Vec2d& px, const CameraModel& cam) {
  return {(px.x() - cam.cx) / cam.fx, (px.y() - cam.cy) / cam.fy};
}

struct PointStats {
  Vec3d centroid;
  double scale;
  Mat3d axes;  // principal directions, columns by decreasing spread
  Vec3d spread;
};

PointStats point_stats(const std::vector<Correspondence>& items) {
  PointStats s{Vec3d::Zero(), 0, Mat3d::Identity(), Vec3d::Zero()};
  for (const auto& c : items) s.centroid += c.object;
  s.centroid /= static_cast<double>(items.size());
  Mat3d cov = Mat3d::Zero();
  for (const auto& c : items) {
    const Vec3d d = c.object - s.centroid;
    cov += d * d.transpose();
    s.scale += d.norm();
  }
  s.scale /= static_cast<double>(items.size());
  Eigen::SelfAdjointEigenSolver<Mat3d> eig(cov);
  // Eigen sorts ascending; flip to descending.
  for (int k = 0; k < 3; ++k) {
    s.axes.col(k) = eig.eigenvectors().col(2 - k);
    s.spread[k] = std::sqrt(std::max(0.0, eig.eigenvalues()[2 - k]));
  }
  if (s.axes.determinant() < 0) s.axes.col(2) = -s.axes.col(2);
  return s;
}

Pose dlt_general(const Correspondences& corr, const PointStats& st) {
  const auto& items = corr.items;
  Eigen::MatrixXd a(2 * items.size(), 12);
  for (std::size_t k = 0; k < items.size(); ++k) {
    const Vec3d x = (items[k].object - st.centroid) / st.scale;
    const Vec2d u = normalized(items[k].pixel, corr.camera);
    Eigen::Matrix<double, 1, 4> xh(x.x(), x.y(), x.z(), 1.0);
    a.row(2 * k) << xh, Eigen::Matrix<double, 1, 4>::Zero(), -u.x() * xh;
    a.row(2 * k + 1) << Eigen::Matrix<double, 1, 4>::Zero(), xh, -u.y() * xh;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::Matrix<double, 12, 1> p = svd.matrixV().col(11);
  Eigen::Matrix<double, 3, 4> proj;
  for (int r = 0; r < 3; ++r) proj.row(r) = p.segment<4>(4 * r).transpose();
  // Points must end up in front of the camera; the centroid sits at x = 0.
  if (proj(2, 3) < 0) proj = -proj;
  const Mat3d m = proj.leftCols<3>();
  const Mat3d r = project_to_rotation(m);
  const double lambda = m.norm() / std::sqrt(3.0) / st.scale;
  return {r, Vec3d(proj.col(3) / lambda - r * st.centroid)};
}

Pose homography_planar(const Correspondences& corr, const PointStats& st) {
  const auto& items = corr.items;
  Eigen::MatrixXd a(2 * items.size(), 9);
  for (std::size_t k = 0; k < items.size(); ++k) {
    const Vec3d d = (items[k].object - st.centroid) / st.scale;
    const double x = d.dot(st.axes.col(0)), y = d.dot(st.axes.col(1));
    const Vec2d u = normalized(items[k].pixel, corr.camera);
    a.row(2 * k) << x, y, 1, 0, 0, 0, -u.x() * x, -u.x() * y, -u.x();
    a.row(2 * k + 1) << 0, 0, 0, x, y, 1, -u.y() * x, -u.y() * y, -u.y();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Mat3d hm;
  hm << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  if (hm(2, 2) < 0) hm = -hm;
  // hm = mu * [s r1, s r2, R c + t]
  const double mu = (hm.col(0).norm() + hm.col(1).norm()) / (2.0 * st.scale);
  Mat3d local;
  local.col(0) = hm.col(0) / (mu * st.scale);
  local.col(1) = hm.col(1) / (mu * st.scale);
  local.col(2) = local.col(0).cross(local.col(1));
  const Mat3d r = project_to_rotation(local) * st.axes.transpose();
  return {r, Vec3d(hm.col(2) / mu - r * st.centroid)};
}

struct Linearization {
  Mat6 jtj;
  Vec6 jtr;
  double cost;  // sum of squared residuals
};

Linearization linearize(const Correspondences& corr, const Pose& pose) {
  Linearization lin{Mat6::Zero(), Vec6::Zero(), 0};
  const auto& cam = corr.camera;
  for (const auto& c : corr.items) {
    const Vec3d rx = pose.rotation * c.object;
    const Vec3d pc = rx + pose.translation;
    const double iz = 1.0 / pc.z();
    const Vec2d res = cam.project(pc) - c.pixel;
    Eigen::Matrix<double, 2, 3> dproj;
    dproj << cam.fx * iz, 0, -cam.fx * pc.x() * iz * iz, 0, cam.fy * iz, -cam.fy * pc.y() * iz * iz;
    Eigen::Matrix<double, 2, 6> j;
    j.leftCols<3>() = -dproj * skew(rx);
    j.rightCols<3>() = dproj;
    lin.jtj.noalias() += j.transpose() * j;
    lin.jtr.noalias() += j.transpose() * res;
    lin.cost += res.squaredNorm();
  }
  return lin;
}

double cost(const Correspondences& corr, const Pose& pose) {
  double sum = 0;
  for (const auto& c : corr.items) {
    const Vec3d pc = pose * c.object;
    if (!(pc.z() > 0)) return std::numeric_limits<double>::infinity();
    sum += (corr.camera.project(pc) - c.pixel).squaredNorm();
  }
  return sum;
}

}  // namespace

Correspondences correspondences_from_map(const PointMap& points, const CameraModel& cam) {
  Correspondences out{{}, cam};
  for (int j = 0; j < points.height(); ++j)
    for (int i = 0; i < points.width(); ++i)
      if (points.valid(i, j)) out.items.push_back({Vec2d(i, j), points.at(i, j)});
  return out;
}

double reprojection_rms(const Correspondences& corr, const Pose& pose) {
  if (corr.items.empty()) return 0.0;
  return std::sqrt(cost(corr, pose) / static_cast<double>(corr.items.size()));
}

Pose initial_pose(const Correspondences& corr) {
  if (corr.items.size() < 6) throw DegenerateError("pnp: need at least 6 correspondences");
  const PointStats st = point_stats(corr.items);
  if (!(st.spread[0] > 0) || st.spread[1] < 1e-9 * st.spread[0])
    throw DegenerateError("pnp: object points are collinear");
  if (st.spread[2] < 1e-6 * st.spread[0]) return homography_planar(corr, st);
  return dlt_general(corr, st);
}

PnpResult solve_pnp(const Correspondences& corr, const std::optional<Pose>& init,
                    const PnpOptions& options) {
  corr.camera.validate();
  if (corr.items.size() < 6) throw DegenerateError("pnp: need at least 6 correspondences");
  PnpResult out;
  out.pose = init ? *init : initial_pose(corr);
  const double n = static_cast<double>(corr.items.size());
  double current = cost(corr, out.pose);
  out.initial_rms = std::sqrt(current / n);
  if (!std::isfinite(current)) throw PnpError("pnp: initialization puts points behind the camera", current);

  double lambda = options.initial_damping;
  for (int it = 0; it < options.max_iterations; ++it) {
    out.iterations = it + 1;
    const Linearization lin = linearize(corr, out.pose);
    Eigen::SelfAdjointEigenSolver<Mat6> eig(lin.jtj, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues()[0] > 1e-12 * eig.eigenvalues()[5]))
      throw DegenerateError("pnp: rank-deficient normal equations");

    bool accepted = false;
    while (!accepted) {
      Mat6 a = lin.jtj;
      a.diagonal() += lambda * lin.jtj.diagonal();
      const Vec6 step = -a.ldlt().solve(lin.jtr);
      Pose trial;
      trial.rotation = exp_so3<double>(step.head<3>()) * out.pose.rotation;
      trial.translation = out.pose.translation + step.tail<3>();
      const double trial_cost = cost(corr, trial);
      if (trial_cost <= current) {
        accepted = true;
        lambda = std::max(lambda * 0.1, 1e-15);
        const bool done = step.norm() < options.step_tolerance;
        out.pose = trial;
        current = trial_cost;
        if (done) {
          out.final_rms = std::sqrt(current / n);
          return out;
        }
      } else {
        lambda *= 10.0;
        // No descent direction left at this scale: the current pose is a minimum.
        if (lambda > 1e16 || step.norm() < options.step_tolerance) {
          out.final_rms = std::sqrt(current / n);
          return out;
        }
      }
    }
  }
  throw PnpError("pnp: no convergence within the iteration limit", std::sqrt(current / n));
}

PoseError sym_pose_error(const Pose& estimate, const Pose& truth, const SymmetrySpec& spec) {
  const double trans = (estimate.translation - truth.translation).norm();
  double rot = std::numeric_limits<double>::infinity();
  if (spec.is_continuous()) {
    const Vec3d& a = spec.primary().axis;
    const Mat3d d = estimate.rotation.transpose() * truth.rotation;
    for (const auto& s : spec.discrete_group())
      rot = std::min(rot, angle_between<double>(s.transpose() * a, d * a));
  } else {
    for (const auto& g : spec.discrete_group())
      rot = std::min(rot, rotation_distance<double>(estimate.rotation, truth.rotation * g));
  }
  return {rot, trans};
}

}  // namespace csl
