#include "csl/toylab/disc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace csl::toylab {

namespace {

std::vector<double> smooth_noise(int samples, double sigma, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> noise(samples);
  for (auto& v : noise) v = uni(rng);
  std::vector<double> out(samples, 0.0);
  const int reach = static_cast<int>(std::ceil(3 * sigma));
  for (int i = 0; i < samples; ++i) {
    double wsum = 0;
    for (int d = -reach; d <= reach; ++d) {
      const double w = std::exp(-0.5 * d * d / (sigma * sigma));
      out[i] += w * noise[((i + d) % samples + samples) % samples];
      wsum += w;
    }
    out[i] /= wsum;
  }
  const auto [lo, hi] = std::minmax_element(out.begin(), out.end());
  const double a = *lo, b = *hi;
  for (auto& v : out) v = 0.1 + 0.8 * (v - a) / (b - a);
  return out;
}

}  // namespace

DiscTexture::DiscTexture(int fold, std::uint64_t seed, int base_samples, double smoothing)
    : fold_(fold), seed_(seed) {
  if (fold < 1) throw std::invalid_argument("DiscTexture: fold must be >= 1");
  if (base_samples < 4) throw std::invalid_argument("DiscTexture: need at least 4 base samples");
  std::mt19937_64 rng(seed);
  do {
    base_ = smooth_noise(base_samples, smoothing, rng);
  } while (has_shorter_period(base_));
}

bool DiscTexture::has_shorter_period(const std::vector<double>& p) {
  const int n = static_cast<int>(p.size());
  const double mean = std::accumulate(p.begin(), p.end(), 0.0) / n;
  double var = 0;
  for (double v : p) var += (v - mean) * (v - mean);
  if (var == 0.0) return true;
  // Any shorter period of a sampled pattern divides its length.
  for (int s = 1; s < n; ++s) {
    if (n % s != 0) continue;
    double acc = 0;
    for (int i = 0; i < n; ++i) acc += (p[i] - mean) * (p[(i + s) % n] - mean);
    if (acc / var > 0.99) return true;
  }
  return false;
}

double DiscTexture::sample(double phi) const {
  const int n = static_cast<int>(base_.size());
  double t = std::fmod(phi, theta());
  if (t < 0) t += theta();
  t = t / theta() * n;
  const int i = std::min(static_cast<int>(std::floor(t)), n - 1);
  const double f = t - i;
  auto at = [&](int k) { return base_[((k % n) + n) % n]; };
  const double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
  return p1 + 0.5 * f *
                  (p2 - p0 + f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + f * (3.0 * (p1 - p2) + p3 - p0)));
}

double pixel_abscissa(int k, int width) { return -1.0 + (k + 0.5) * 2.0 / width; }

namespace {

// World position of the perimeter point seen by pixel k (camera on the -Y side).
Vec2d seen_point(int k, int width) {
  const double u = pixel_abscissa(k, width);
  return {u, -std::sqrt(1.0 - u * u)};
}

}  // namespace

LineImage render_disc(double alpha, const DiscTexture& tex, int width) {
  LineImage img(width);
  const Mat2d inv = rot2(-alpha);
  for (int k = 0; k < width; ++k) {
    const Vec2d p = inv * seen_point(k, width);
    img[k] = tex.sample(std::atan2(p.y(), p.x()));
  }
  return img;
}

DenseMap<2> object_point_image(double alpha, int width) {
  DenseMap<2> m(width, 1);
  const Mat2d inv = rot2(-alpha);
  for (int k = 0; k < width; ++k) m.set(k, 0, inv * seen_point(k, width));
  return m;
}

DenseMap<2> csl_image(double alpha, int fold, int width) {
  return object_point_image(alpha, width).transformed([&](const Vec2d& p, int, int) {
    Polar2<double> pol = pol2<double>(p);
    pol.phi *= fold;
    return cart2(pol);
  });
}

std::string_view name(Representation r) {
  switch (r) {
    case Representation::NormAngle: return "norm-angle";
    case Representation::Angle: return "angle";
    case Representation::Vector: return "vector";
    case Representation::CslVector: return "csl-vector";
    case Representation::PoImagePmos: return "pO-img-pmos";
    case Representation::PoImageImos: return "pO-img-imos";
    case Representation::CslImage: return "csl-img";
  }
  return "?";
}

std::string_view loss_name(Representation r) {
  switch (r) {
    case Representation::NormAngle: return "ae";
    case Representation::Angle: return "mos-ae";
    case Representation::Vector: return "mos-ae";
    case Representation::CslVector: return "ae";
    case Representation::PoImagePmos: return "pmos-mae";
    case Representation::PoImageImos: return "imos-mae";
    case Representation::CslImage: return "mae";
  }
  return "?";
}

Representation parse_representation(std::string_view s) {
  for (auto r : kAllRepresentations)
    if (name(r) == s) return r;
  throw std::invalid_argument("unknown representation '" + std::string(s) + "'");
}

bool is_image(Representation r) {
  return r == Representation::PoImagePmos || r == Representation::PoImageImos ||
         r == Representation::CslImage;
}

int output_channels(Representation r) {
  return r == Representation::NormAngle || r == Representation::Angle ? 1 : 2;
}

Eigen::VectorXd make_target(Representation r, double alpha, int fold, int width) {
  const double theta = 2.0 * kPi<double> / fold;
  auto flatten = [width](const DenseMap<2>& m) {
    Eigen::VectorXd v(2 * width);
    for (int k = 0; k < width; ++k) {
      v[k] = m.at(k, 0).x();
      v[width + k] = m.at(k, 0).y();
    }
    return v;
  };
  switch (r) {
    case Representation::NormAngle: {
      Eigen::VectorXd v(1);
      v[0] = alpha - theta * std::floor(alpha / theta);
      return v;
    }
    case Representation::Angle: {
      Eigen::VectorXd v(1);
      v[0] = alpha;
      return v;
    }
    case Representation::Vector: return Eigen::Vector2d(std::cos(alpha), std::sin(alpha));
    case Representation::CslVector:
      return Eigen::Vector2d(std::cos(fold * alpha), std::sin(fold * alpha));
    case Representation::PoImagePmos:
    case Representation::PoImageImos: return flatten(object_point_image(alpha, width));
    case Representation::CslImage: return flatten(csl_image(alpha, fold, width));
  }
  throw std::logic_error("make_target: unknown representation");
}

std::pair<Dataset, Dataset> make_datasets(const DiscTexture& tex, Representation r, int width) {
  Dataset train{r, {}}, test{r, {}};
  train.samples.reserve(kTrainSize);
  test.samples.reserve(kTestSize);
  for (int k = 0; k < kTrainSize; ++k) {
    const double a = k * kPi<double> / 180.0;
    train.samples.push_back({a, render_disc(a, tex, width), make_target(r, a, tex.fold(), width)});
  }
  for (int k = 0; k < kTestSize; ++k) {
    const double a = k * kPi<double> / 900.0;
    test.samples.push_back({a, render_disc(a, tex, width), make_target(r, a, tex.fold(), width)});
  }
  return {std::move(train), std::move(test)};
}

}  // namespace csl::toylab
