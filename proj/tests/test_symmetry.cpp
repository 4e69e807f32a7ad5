#include "csl/symmetry.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace csl;

namespace {

constexpr double kPiD = kPi<double>;

Vec3d random_vec(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

PointMap random_map(std::mt19937_64& rng, int w, int h) {
  PointMap m(w, h);
  std::bernoulli_distribution keep(0.7);
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i)
      if (keep(rng)) m.set(i, j, random_vec(rng));
  return m;
}

// Star transform written directly from the cylindrical definition, Z axis only.
Vec3d star_oracle(const Vec3d& p, double multiplier) {
  const double rho = std::sqrt(p.x() * p.x() + p.y() * p.y());
  const double phi = rho == 0 ? 0.0 : std::atan2(p.y(), p.x());
  return {rho * std::cos(multiplier * phi), rho * std::sin(multiplier * phi), p.z()};
}

}  // namespace

TEST(Fold, Basics) {
  EXPECT_EQ(Fold::finite(6).order(), 6);
  EXPECT_NEAR(Fold::finite(6).theta(), kPiD / 3, 1e-15);
  EXPECT_TRUE(Fold::infinite().is_infinite());
  EXPECT_EQ(Fold::infinite().multiplier(), 0.0);
  EXPECT_THROW(Fold::infinite().order(), std::logic_error);
  EXPECT_THROW(Fold::finite(0), std::invalid_argument);
}

TEST(CslVector, Examples) {
  EXPECT_LT((csl_vector(0, 6) - Vec2d(1, 0)).norm(), 1e-15);
  EXPECT_LT((csl_vector(kPiD / 6, 6) - Vec2d(-1, 0)).norm(), 1e-15);
  EXPECT_LT((csl_vector(kPiD / 3, 6) - Vec2d(1, 0)).norm(), 1e-14);
  EXPECT_THROW(csl_vector(0, 0), std::invalid_argument);
}

TEST(CslVector, UnitAndPeriodic) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int n = 1; n <= 12; ++n)
    for (int t = 0; t < 100; ++t) {
      const double a = u(rng);
      EXPECT_NEAR(csl_vector(a, n).norm(), 1.0, 1e-15);
      EXPECT_LT((csl_vector(a + 2 * kPiD / n, n) - csl_vector(a, n)).norm(), 1e-12);
    }
}

TEST(StarPoint, Examples) {
  EXPECT_LT((star_point(Vec3d(0, 1, 0.5), Vec3d::UnitZ(), Fold::finite(4)) - Vec3d(1, 0, 0.5)).norm(), 1e-15);
  const double r = std::sqrt(2.0);
  EXPECT_LT((star_point(Vec3d(r, r, 1), Vec3d::UnitZ(), Fold::finite(2)) - Vec3d(0, 2, 1)).norm(), 1e-15);
  EXPECT_LT((star_point(Vec3d(r, r, 1), Vec3d::UnitZ(), Fold::infinite()) - Vec3d(2, 0, 1)).norm(), 1e-15);
}

TEST(StarPoint, OnAxisIsFixed) {
  EXPECT_EQ(star_point(Vec3d(0, 0, 0.3), Vec3d::UnitZ(), Fold::finite(5)), Vec3d(0, 0, 0.3));
  EXPECT_EQ(star_point(Vec3d(0, 0, -1), Vec3d::UnitZ(), Fold::infinite()), Vec3d(0, 0, -1));
}

TEST(StarPoint, MatchesOracle) {
  std::mt19937_64 rng(2);
  for (int n : {1, 2, 3, 4, 6, 12}) {
    for (int t = 0; t < 200; ++t) {
      const Vec3d p = random_vec(rng);
      EXPECT_LT((star_point(p, Vec3d::UnitZ(), Fold::finite(n)) - star_oracle(p, n)).norm(), 1e-12);
    }
  }
  for (int t = 0; t < 200; ++t) {
    const Vec3d p = random_vec(rng);
    EXPECT_LT((star_point(p, Vec3d::UnitZ(), Fold::infinite()) - star_oracle(p, 0)).norm(), 1e-12);
  }
}

TEST(StarPoint, PreservesRadiusAndHeight) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 500; ++t) {
    const Vec3d axis = random_vec(rng).normalized();
    const Vec3d p = random_vec(rng);
    const Vec3d s = star_point(p, axis, Fold::finite(1 + t % 7));
    EXPECT_NEAR(s.dot(axis), p.dot(axis), 1e-12);
    EXPECT_NEAR(s.norm(), p.norm(), 1e-12);
  }
}

TEST(StarPoint, InvariantUnderSymmetryRotation) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> k(-7, 7);
  for (int t = 0; t < 2000; ++t) {
    const Vec3d axis = t % 2 ? Vec3d::UnitZ() : random_vec(rng).normalized();
    const int n = 1 + t % 12;
    const Fold f = Fold::finite(n);
    const Vec3d p = random_vec(rng);
    const Vec3d q = axis_angle(k(rng) * f.theta(), axis) * p;
    EXPECT_LT((star_point(q, axis, f) - star_point(p, axis, f)).norm(), 1e-9);
  }
}

TEST(StarPoint, InfiniteFoldInvariantUnderAnyAngle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(-20, 20);
  for (int t = 0; t < 1000; ++t) {
    const Vec3d axis = random_vec(rng).normalized();
    const Vec3d p = random_vec(rng);
    const Vec3d q = axis_angle(ang(rng), axis) * p;
    EXPECT_LT((star_point(q, axis, Fold::infinite()) - star_point(p, axis, Fold::infinite())).norm(), 1e-9);
  }
}

TEST(StarPoint, ContinuousAcrossTheSeam) {
  // A point rotating through theta traces a closed curve without jumps.
  const Fold f = Fold::finite(6);
  const Vec3d p(0.4, 0.0, 0.2);
  const int steps = 2000;
  std::vector<double> dists;
  Vec3d prev = star_point(p, Vec3d::UnitZ(), f);
  for (int s = 1; s <= steps; ++s) {
    const Vec3d cur = star_point(Vec3d(rot_z(3 * f.theta() * s / steps) * p), Vec3d::UnitZ(), f);
    dists.push_back((cur - prev).norm());
    prev = cur;
  }
  std::vector<double> sorted = dists;
  std::nth_element(sorted.begin(), sorted.begin() + steps / 2, sorted.end());
  const double median = sorted[steps / 2];
  EXPECT_LT(*std::max_element(dists.begin(), dists.end()), 10 * median);
}

TEST(SymmetrySpec, Validation) {
  EXPECT_THROW(SymmetrySpec(Vec3d::Zero(), Fold::finite(2)), std::invalid_argument);
  EXPECT_THROW(SymmetrySpec(Vec3d::UnitZ(), Fold::finite(2), Vec3d(0, 0, -2), 2), std::invalid_argument);
  // Cube-like: two perpendicular 4-fold axes.
  EXPECT_THROW(SymmetrySpec(Vec3d::UnitZ(), Fold::finite(4), Vec3d::UnitX(), 4), std::invalid_argument);
  EXPECT_THROW(SymmetrySpec(Vec3d::UnitZ(), Fold::finite(2), Vec3d(1, 0, 1), 2), std::invalid_argument);
  const SymmetrySpec ok(Vec3d(0, 0, 3), Fold::finite(4), Vec3d::UnitX(), 2);
  ASSERT_TRUE(ok.secondary().has_value());
  EXPECT_NEAR(ok.primary().axis.norm(), 1.0, 1e-15);
  EXPECT_EQ(ok.discrete_group().size(), 8u);
}

TEST(SymmetrySpec, GroupLeavesStarMapInvariant) {
  std::mt19937_64 rng(6);
  const SymmetrySpec specs[] = {
      SymmetrySpec(Vec3d::UnitZ(), Fold::finite(4)),
      SymmetrySpec(Vec3d(1, 1, 0), Fold::finite(3)),
      SymmetrySpec(Vec3d::UnitZ(), Fold::finite(2), Vec3d::UnitX(), 2),
      SymmetrySpec(Vec3d::UnitZ(), Fold::finite(6), Vec3d::UnitY(), 2),
      SymmetrySpec(Vec3d::UnitZ(), Fold::finite(3), Vec3d(1, 2, 0), 2),
      SymmetrySpec(Vec3d(0, 1, 1), Fold::finite(5), Vec3d(1, 0, 0), 2),
      SymmetrySpec(Vec3d::UnitZ(), Fold::infinite(), Vec3d::UnitX(), 2),
  };
  for (const auto& spec : specs) {
    const PointMap m = random_map(rng, 6, 5);
    const PointMap s = star_map(m, spec);
    for (const Mat3d& g : spec.discrete_group()) {
      const PointMap gs = star_map(m.transformed([&](const Vec3d& v, int, int) { return Vec3d(g * v); }), spec);
      for (auto k : m.valid_indices()) EXPECT_LT((gs[k] - s[k]).norm(), 1e-9);
    }
  }
}

TEST(StarMap, EmptyAndIdentity) {
  const PointMap empty(4, 3);
  EXPECT_EQ(star_map(empty, SymmetrySpec(Vec3d::UnitZ(), Fold::finite(4))).valid_count(), 0u);

  std::mt19937_64 rng(7);
  const PointMap m = random_map(rng, 5, 4);
  const PointMap s = star_map(m, SymmetrySpec(Vec3d::UnitZ(), Fold::finite(1)));
  EXPECT_TRUE(s.same_mask(m));
  for (auto k : m.valid_indices()) EXPECT_LT((s[k] - m[k]).norm(), 1e-15);
}

TEST(StarMap, PerPixelAndTwoAxis) {
  std::mt19937_64 rng(8);
  const PointMap m = random_map(rng, 5, 4);
  const SymmetrySpec spec(Vec3d::UnitZ(), Fold::finite(4), Vec3d::UnitX(), 2);
  const PointMap s = star_map(m, spec);
  EXPECT_TRUE(s.same_mask(m));
  for (auto k : m.valid_indices()) {
    const Vec3d first = star_point(m[k], Vec3d::UnitZ(), Fold::finite(4));
    EXPECT_LT((s[k] - star_point(first, Vec3d::UnitX(), Fold::finite(2))).norm(), 1e-15);
  }
  // A secondary axis at 45 degrees is seen at 180 degrees by the second pass.
  const SymmetrySpec diag(Vec3d::UnitZ(), Fold::finite(4), Vec3d(1, 1, 0), 2);
  EXPECT_LT((diag.secondary_star_axis() - Vec3d(-1, 0, 0)).norm(), 1e-12);
  const PointMap d = star_map(m, diag);
  for (auto k : m.valid_indices()) {
    const Vec3d first = star_point(m[k], Vec3d::UnitZ(), Fold::finite(4));
    EXPECT_LT((d[k] - star_point(first, Vec3d(-1, 0, 0), Fold::finite(2))).norm(), 1e-12);
  }
}

TEST(RayRotation, PrincipalPointIsIdentity) {
  const CameraModel cam;
  EXPECT_EQ(r_ray(cam.cx, cam.cy, cam), Mat3d::Identity());
}

TEST(RayRotation, MapsZOntoPinholeRay) {
  const CameraModel cam;
  for (int j = 0; j < cam.height; j += 7)
    for (int i = 0; i < cam.width; i += 9) {
      const Mat3d r = r_ray(i, j, cam);
      const Vec3d expected = Vec3d((i - cam.cx) / cam.fx, (j - cam.cy) / cam.fy, 1.0).normalized();
      EXPECT_TRUE(is_rotation(r));
      EXPECT_LT((r * Vec3d::UnitZ() - expected).norm(), 1e-9);
      // The rotation axis is perpendicular to both Z and the ray.
      if (i != cam.cx || j != cam.cy) {
        const Eigen::AngleAxisd aa(r);
        EXPECT_NEAR(aa.axis().z(), 0.0, 1e-9);
      }
    }
  // Left of centre: the ray leans towards -X.
  EXPECT_LT((r_ray(10, cam.cy, cam) * Vec3d::UnitZ()).x(), 0.0);
}

TEST(Camera, Validation) {
  CameraModel cam;
  EXPECT_NO_THROW(cam.validate());
  cam.fx = 0;
  EXPECT_THROW(cam.validate(), std::invalid_argument);
  cam = CameraModel{};
  cam.cx = 500;
  EXPECT_THROW(cam.validate(), std::invalid_argument);
}

TEST(DashPoint, Examples) {
  const CameraModel cam;
  const Vec3d p(0.1, -0.2, 0.3);
  EXPECT_LT((dash_point(p, Mat3d::Identity(), cam.cx, cam.cy, cam) - p).norm(), 1e-15);
  const Mat3d r = exp_so3(Vec3d(0.3, -0.5, 0.9));
  EXPECT_LT((dash_point(p, r, cam.cx, cam.cy, cam) - r * p).norm(), 1e-15);
}

TEST(DashPoint, PreservesNormsAndAngles) {
  const CameraModel cam;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ui(0, cam.width - 1), uj(0, cam.height - 1);
  for (int t = 0; t < 1000; ++t) {
    const Mat3d r = exp_so3(random_vec(rng, 3));
    const double i = ui(rng), j = uj(rng);
    const Vec3d p1 = random_vec(rng), p2 = random_vec(rng);
    const Vec3d d1 = dash_point(p1, r, i, j, cam), d2 = dash_point(p2, r, i, j, cam);
    EXPECT_NEAR(d1.norm(), p1.norm(), 1e-9);
    EXPECT_NEAR(angle_between(d1, d2), angle_between(p1, p2), 1e-9);
  }
}

TEST(DashMap, LiftsPerPixelAndUndashes) {
  const CameraModel cam{200, 200, 3, 2, 7, 5};
  std::mt19937_64 rng(10);
  const PointMap m = random_map(rng, cam.width, cam.height);
  const Pose pose{exp_so3(Vec3d(0.2, 0.4, -0.3)), Vec3d(0, 0, 1)};
  const PointMap d = dash_map(m, pose, cam);
  EXPECT_TRUE(d.same_mask(m));
  const PointMap u = undash_map(d, cam);
  for (auto k : m.valid_indices()) {
    const int i = static_cast<int>(k) % cam.width, j = static_cast<int>(k) / cam.width;
    EXPECT_LT((d[k] - dash_point(m[k], pose.rotation, i, j, cam)).norm(), 1e-15);
    EXPECT_LT((u[k] - pose.rotation * m[k]).norm(), 1e-12);
  }
}
