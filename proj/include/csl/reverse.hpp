#pragma once

#include "csl/camera.hpp"
#include "csl/dense_map.hpp"
#include "csl/errors.hpp"
#include "csl/geom.hpp"
#include "csl/symmetry.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

// Recovery of consistent object points from the star and dash maps.
//
// Throughout this module a "dash" vector is the object point rotated into the
// camera frame, i.e. the per-pixel dash map with its viewing-ray rotation
// undone (see undash_map). Angles between such vectors equal the angles
// between the corresponding object points.
namespace csl {

/// All object points sharing one star value.
///
/// Finite folds list the n members in order of k. The continuous fold is
/// described by its generator circle: radius `rho` and axial coordinate
/// `height` about `axis`.
struct EquivalenceClass {
  Vec3d axis = Vec3d::UnitZ();
  bool continuous = false;
  std::vector<Vec3d> members;
  double rho = 0;
  double height = 0;

  /// The member at angle zero about the axis.
  Vec3d generator() const;
};

EquivalenceClass equivalence_class(const Vec3d& star_pt, const Vec3d& axis, Fold fold);

struct Reference {
  Vec3d object;  // chosen object point
  Vec3d dash;    // its dash vector
};

/// Three references whose object points are noncollinear.
class ReferenceSet {
 public:
  ReferenceSet(const Reference& a, const Reference& b, const Reference& c,
               double min_area = 1e-12);

  const std::array<Reference, 3>& refs() const { return refs_; }
  const Reference& operator[](std::size_t k) const { return refs_[k]; }

 private:
  std::array<Reference, 3> refs_;
};

struct RansacConfig {
  int num_samples = 16;
  /// Triangle area threshold relative to the squared object diameter.
  double collinearity_epsilon = 1e-6;
  std::uint64_t seed = 0;
};

/// Sum over references of |angle(p, p_r) - angle(dash, dash_r)|.
double angle_error_sum(const Vec3d& p, const Vec3d& dash, std::span<const Reference> refs);

/// Member with the smallest angle error sum; ties go to the lowest index.
/// Continuous classes are resolved through continuous_candidates.
Vec3d disambiguate_point(const EquivalenceClass& cls, const Vec3d& dash, const ReferenceSet& refs);

/// For each reference, the (up to two) members of a continuous class whose
/// angle to the reference object point equals the observed dash angle.
/// References whose circle-to-reference geometry is degenerate are skipped.
std::vector<Vec3d> continuous_candidates(const EquivalenceClass& cls, const Vec3d& dash,
                                         std::span<const Reference> refs);

struct ReferenceSelection {
  ReferenceSet refs;
  double total_error;                 // of the winning sample
  std::vector<double> sample_errors;  // one entry per accepted sample, in draw order
  std::array<std::size_t, 3> pixels;  // pixel indices of the winning triple
};

/// RANSAC over pixel triples. Each triple is expanded into the member
/// combination with the smallest pairwise angle error (first member fixed to
/// its k = 0 equivalent) and scored by the angle error sum of the induced
/// disambiguation over all valid pixels.
ReferenceSelection select_references(const PointMap& star, const PointMap& dash,
                                     const SymmetrySpec& spec, const RansacConfig& cfg);

struct ReverseResult {
  PointMap points;
  ReferenceSelection selection;
};

/// Regains an object point map from star and (ray-rotated) dash maps.
ReverseResult reverse_map(const PointMap& star, const PointMap& dash, const SymmetrySpec& spec,
                          const CameraModel& cam, const RansacConfig& cfg = {});

/// Largest pixel distance between `estimate` and `truth` after applying the
/// single symmetry rotation to `estimate` that minimizes it. For a continuous
/// fold the rotation angle about the axis is fitted in closed form. Masks must
/// agree.
double map_error_up_to_symmetry(const PointMap& estimate, const PointMap& truth,
                                const SymmetrySpec& spec);

}  // namespace csl
