#include "csl/reverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

namespace csl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Frame whose Z column is the symmetry axis; exact identity for +Z.
Mat3d axis_frame(const Vec3d& axis) {
  if (axis.x() == 0.0 && axis.y() == 0.0 && axis.z() > 0.0) return Mat3d::Identity();
  return frame_with_z(axis);
}

double triangle_area(const Vec3d& a, const Vec3d& b, const Vec3d& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

double triple_product(const Vec3d& a, const Vec3d& b, const Vec3d& c) { return a.dot(b.cross(c)); }

std::vector<Vec3d> class_candidates(const EquivalenceClass& cls, const Vec3d& dash,
                                    std::span<const Reference> refs) {
  if (!cls.continuous) return cls.members;
  auto c = continuous_candidates(cls, dash, refs);
  if (c.empty()) c.push_back(cls.generator());
  return c;
}

struct Resolved {
  Vec3d point;
  double error;
};

Resolved resolve(const EquivalenceClass& cls, const Vec3d& dash, std::span<const Reference> refs) {
  const auto cands = class_candidates(cls, dash, refs);
  Resolved best{cands.front(), kInf};
  for (const auto& p : cands) {
    const double err = angle_error_sum(p, dash, refs);
    if (err < best.error) best = {p, err};
  }
  return best;
}

struct Pixel {
  std::size_t index;
  EquivalenceClass cls;
  Vec3d dash;
};

// The member combination of a pixel triple with the smallest pairwise angle
// error. The first member is fixed to its generator. Angles cannot tell a
// configuration from its mirror image, so combinations whose handedness
// disagrees with the dash triple are only used when no other exists.
struct Expansion {
  std::array<Reference, 3> refs;
  double error = kInf;
};

Expansion expand_triple(const Pixel& a, const Pixel& b, const Pixel& c) {
  const Reference ra{a.cls.generator(), a.dash};
  const double dash_orientation = triple_product(a.dash, b.dash, c.dash);

  Expansion best, best_mirrored;
  const std::array<Reference, 1> first{ra};
  for (const auto& pb : class_candidates(b.cls, b.dash, first)) {
    const Reference rb{pb, b.dash};
    const std::array<Reference, 2> two{ra, rb};
    const double err_ab = std::abs(angle_between(ra.object, pb) - angle_between(a.dash, b.dash));
    for (const auto& pc : class_candidates(c.cls, c.dash, two)) {
      const double err = err_ab + angle_error_sum(pc, c.dash, two);
      const bool same_hand =
          (triple_product(ra.object, pb, pc) > 0) == (dash_orientation > 0);
      Expansion& slot = same_hand ? best : best_mirrored;
      if (err < slot.error) slot = {{ra, rb, Reference{pc, c.dash}}, err};
    }
  }
  return best.error < kInf ? best : best_mirrored;
}

}  // namespace

Vec3d EquivalenceClass::generator() const {
  if (!continuous) return members.front();
  return axis_frame(axis) * Vec3d(rho, 0.0, height);
}

EquivalenceClass equivalence_class(const Vec3d& star_pt, const Vec3d& axis, Fold fold) {
  EquivalenceClass out;
  out.axis = axis.normalized();
  const Mat3d frame = axis_frame(out.axis);
  const Cyl3<double> c = cyl<double>(Vec3d(frame.transpose() * star_pt));
  out.rho = c.rho;
  out.height = c.z;
  if (fold.is_infinite()) {
    out.continuous = true;
    return out;
  }
  const int n = fold.order();
  for (int k = 0; k < n; ++k) {
    const Cyl3<double> m{c.phi / n + k * fold.theta(), c.rho, c.z};
    out.members.push_back(frame * cart(m));
  }
  return out;
}

ReferenceSet::ReferenceSet(const Reference& a, const Reference& b, const Reference& c,
                           double min_area)
    : refs_{a, b, c} {
  if (!(triangle_area(a.object, b.object, c.object) > min_area))
    throw DegenerateError("ReferenceSet: reference points are collinear");
}

double angle_error_sum(const Vec3d& p, const Vec3d& dash, std::span<const Reference> refs) {
  double sum = 0;
  for (const auto& r : refs)
    sum += std::abs(angle_between(p, r.object) - angle_between(dash, r.dash));
  return sum;
}

Vec3d disambiguate_point(const EquivalenceClass& cls, const Vec3d& dash, const ReferenceSet& refs) {
  if (!cls.continuous && cls.members.empty())
    throw std::invalid_argument("disambiguate_point: empty equivalence class");
  return resolve(cls, dash, refs.refs()).point;
}

std::vector<Vec3d> continuous_candidates(const EquivalenceClass& cls, const Vec3d& dash,
                                         std::span<const Reference> refs) {
  const Mat3d frame = axis_frame(cls.axis);
  const double p_norm = std::hypot(cls.rho, cls.height);
  std::vector<Vec3d> out;
  for (const auto& r : refs) {
    const Cyl3<double> rc = cyl<double>(Vec3d(frame.transpose() * r.object));
    // The member above the reference: same azimuth, own radius and height.
    const Vec3d above = cart(Cyl3<double>{rc.phi, cls.rho, cls.height});
    const double r_norm = r.object.norm();
    const double radial = cls.rho * rc.rho;
    if (radial < 1e-9 * p_norm * r_norm) continue;
    // Rotating `above` by beta about the axis gives
    //   cos angle = (rho*rho_r*cos(beta) + z*z_r) / (|p| |p_r|);
    // solve for the beta that reproduces the observed dash angle.
    const double target = std::cos(angle_between(dash, r.dash));
    const double cos_beta =
        std::clamp((target * p_norm * r_norm - cls.height * rc.z) / radial, -1.0, 1.0);
    const double beta = std::acos(cos_beta);
    out.push_back(frame * rot_z(beta) * above);
    if (beta != 0.0) out.push_back(frame * rot_z(-beta) * above);
  }
  return out;
}

ReferenceSelection select_references(const PointMap& star, const PointMap& dash,
                                     const SymmetrySpec& spec, const RansacConfig& cfg) {
  if (cfg.num_samples < 1) throw std::invalid_argument("RansacConfig: num_samples must be >= 1");
  if (spec.secondary())
    throw std::invalid_argument("reverse: two-axis symmetries are not supported");
  if (!star.same_shape(dash)) throw std::invalid_argument("reverse: star and dash maps differ in shape");

  std::vector<Pixel> pixels;
  double radius = 0;
  for (std::size_t k = 0; k < star.size(); ++k) {
    if (!star.valid(k) || !dash.valid(k) || dash[k].norm() == 0.0) continue;
    pixels.push_back({k, equivalence_class(star[k], spec.primary().axis, spec.primary().fold), dash[k]});
    radius = std::max(radius, dash[k].norm());
  }
  if (pixels.size() < 3) throw DegenerateError("reverse: fewer than 3 valid pixels");

  const double diameter = 2.0 * radius;
  const double min_area = cfg.collinearity_epsilon * diameter * diameter;
  const double min_volume = cfg.collinearity_epsilon * diameter * diameter * diameter;

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, pixels.size() - 1);

  std::optional<ReferenceSelection> best;
  std::vector<double> sample_errors;
  const long max_attempts = 64L * cfg.num_samples + 256;
  for (long attempt = 0; attempt < max_attempts && static_cast<int>(sample_errors.size()) < cfg.num_samples;
       ++attempt) {
    const std::size_t ia = pick(rng), ib = pick(rng), ic = pick(rng);
    if (ia == ib || ib == ic || ia == ic) continue;
    const Pixel &a = pixels[ia], &b = pixels[ib], &c = pixels[ic];
    // Dash vectors share the object-point geometry, so test them directly.
    if (!(triangle_area(a.dash, b.dash, c.dash) > min_area)) continue;
    if (!(std::abs(triple_product(a.dash, b.dash, c.dash)) > min_volume)) continue;

    const Expansion e = expand_triple(a, b, c);
    if (!(e.error < kInf)) continue;
    if (!(triangle_area(e.refs[0].object, e.refs[1].object, e.refs[2].object) > min_area)) continue;

    double total = 0;
    for (const auto& px : pixels) total += resolve(px.cls, px.dash, e.refs).error;
    sample_errors.push_back(total);
    if (!best || total < best->total_error)
      best.emplace(ReferenceSelection{ReferenceSet(e.refs[0], e.refs[1], e.refs[2], 0.0), total, {},
                                      {a.index, b.index, c.index}});
  }
  if (!best) throw DegenerateError("reverse: no noncollinear reference triple found");
  best->sample_errors = std::move(sample_errors);
  return std::move(*best);
}

ReverseResult reverse_map(const PointMap& star, const PointMap& dash, const SymmetrySpec& spec,
                          const CameraModel& cam, const RansacConfig& cfg) {
  if (!star.same_mask(dash)) throw std::invalid_argument("reverse: star and dash masks differ");
  const PointMap rotated = undash_map(dash, cam);
  ReferenceSelection sel = select_references(star, rotated, spec, cfg);

  PointMap out(star.width(), star.height());
  for (std::size_t k = 0; k < star.size(); ++k) {
    if (!star.valid(k)) continue;
    if (rotated[k].norm() == 0.0) {
      out.set(k, star[k]);
      continue;
    }
    const auto cls = equivalence_class(star[k], spec.primary().axis, spec.primary().fold);
    out.set(k, disambiguate_point(cls, rotated[k], sel.refs));
  }
  return {std::move(out), std::move(sel)};
}

double map_error_up_to_symmetry(const PointMap& estimate, const PointMap& truth,
                                const SymmetrySpec& spec) {
  if (!estimate.same_mask(truth)) throw std::invalid_argument("map_error_up_to_symmetry: masks differ");
  const auto pixels = truth.valid_indices();
  const Vec3d axis = spec.primary().axis.normalized();
  double best = std::numeric_limits<double>::infinity();
  for (const Mat3d& s : spec.discrete_group()) {
    Mat3d r = s;
    if (spec.is_continuous()) {
      double sin_sum = 0, cos_sum = 0;
      for (auto k : pixels) {
        const Vec3d a = s * estimate[k], b = truth[k];
        const Vec3d ap = a - a.dot(axis) * axis, bp = b - b.dot(axis) * axis;
        sin_sum += axis.dot(ap.cross(bp));
        cos_sum += ap.dot(bp);
      }
      r = axis_angle(std::atan2(sin_sum, cos_sum), axis) * s;
    }
    double worst = 0;
    for (auto k : pixels) worst = std::max(worst, (r * estimate[k] - truth[k]).norm());
    best = std::min(best, worst);
  }
  return best;
}

}  // namespace csl
