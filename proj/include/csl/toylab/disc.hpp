#pragma once

#include "csl/dense_map.hpp"
#include "csl/geom.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace csl::toylab {

inline constexpr int kImageWidth = 64;

/// Albedo around the disc perimeter: a smooth random base pattern tiled
/// `fold` times, so sample(phi) == sample(phi + 2*pi/fold).
class DiscTexture {
 public:
  DiscTexture(int fold, std::uint64_t seed, int base_samples = 24, double smoothing = 2.0);

  int fold() const { return fold_; }
  double theta() const { return 2.0 * kPi<double> / fold_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<double>& base() const { return base_; }

  /// Periodic Catmull-Rom interpolation of the base pattern.
  double sample(double phi) const;

  /// True if the base pattern repeats with a period shorter than its length,
  /// judged by its circular autocorrelation.
  static bool has_shorter_period(const std::vector<double>& pattern);

 private:
  int fold_;
  std::uint64_t seed_;
  std::vector<double> base_;
};

using LineImage = Eigen::VectorXd;

/// Abscissa of pixel k on the unit disc, in (-1, 1).
double pixel_abscissa(int k, int width);

/// Orthographic side view of the front half of the disc perimeter at
/// rotation `alpha`.
LineImage render_disc(double alpha, const DiscTexture& tex, int width = kImageWidth);

/// Object coordinates (2D, unit disc) of the perimeter point seen per pixel.
DenseMap<2> object_point_image(double alpha, int width = kImageWidth);

/// The object point image with every angle multiplied by `fold`.
DenseMap<2> csl_image(double alpha, int fold, int width = kImageWidth);

enum class Representation {
  NormAngle,    // normalized angle, ae
  Angle,        // angle, mos-ae
  Vector,       // unit vector, mos-ae
  CslVector,    // csl vector, ae
  PoImagePmos,  // object point image, per-pixel mos mae
  PoImageImos,  // object point image, per-image mos mae
  CslImage,     // csl image, mae
};

inline constexpr Representation kAllRepresentations[] = {
    Representation::NormAngle,   Representation::Angle,       Representation::Vector,
    Representation::CslVector,   Representation::PoImagePmos, Representation::PoImageImos,
    Representation::CslImage};

std::string_view name(Representation r);
std::string_view loss_name(Representation r);
Representation parse_representation(std::string_view s);
bool is_image(Representation r);
/// Output channels: 1 or 2 for vector heads, 2 per pixel for image heads.
int output_channels(Representation r);

/// Ground-truth target, flattened channel-major (for images: all x, then all y).
Eigen::VectorXd make_target(Representation r, double alpha, int fold, int width = kImageWidth);

struct Sample {
  double alpha;
  LineImage image;
  Eigen::VectorXd target;
};

struct Dataset {
  Representation representation;
  std::vector<Sample> samples;
};

/// Training images every pi/180, test images every pi/900, over [0, 2*pi).
std::pair<Dataset, Dataset> make_datasets(const DiscTexture& tex, Representation r,
                                          int width = kImageWidth);

inline constexpr int kTrainSize = 360;
inline constexpr int kTestSize = 1800;

}  // namespace csl::toylab
