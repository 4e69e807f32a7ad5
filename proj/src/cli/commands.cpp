#include "csl/cli.hpp"

#include "csl/losses.hpp"
#include "csl/map_io.hpp"
#include "csl/pnp.hpp"
#include "csl/reverse.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace csl::cli {

namespace {

std::vector<double> parse_list(const std::string& s, std::size_t expected, const std::string& what) {
  std::vector<double> out;
  std::istringstream is(s);
  for (std::string tok; std::getline(is, tok, ',');) {
    double v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
      throw ConfigError(what + ": bad number '" + tok + "'");
    out.push_back(v);
  }
  if (out.size() != expected)
    throw ConfigError(what + ": expected " + std::to_string(expected) + " values, got " + std::to_string(out.size()));
  return out;
}

Vec3d parse_axis(const std::string& s) {
  if (s == "x") return Vec3d::UnitX();
  if (s == "y") return Vec3d::UnitY();
  if (s == "z") return Vec3d::UnitZ();
  throw ConfigError("symmetry: axis must be x, y or z, got '" + s + "'");
}

Fold parse_fold(const std::string& s) {
  if (s == "inf") return Fold::infinite();
  int n = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc() || ptr != s.data() + s.size() || n < 1)
    throw ConfigError("symmetry: bad fold '" + s + "'");
  return Fold::finite(n);
}

PointMap add_noise(const PointMap& m, double sigma, std::mt19937_64& rng) {
  if (sigma == 0) return m;
  std::normal_distribution<double> g(0.0, sigma);
  return m.transformed([&](const Vec3d& v, int, int) { return Vec3d(v + Vec3d(g(rng), g(rng), g(rng))); });
}

}  // namespace

Shape parse_object(const std::string& s) {
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : s.substr(colon + 1);
  if (kind == "box") {
    const auto v = parse_list(rest, 3, "object");
    if (v[0] <= 0 || v[1] <= 0 || v[2] <= 0) throw ConfigError("object: box extents must be positive");
    return Box{Vec3d(v[0], v[1], v[2])};
  }
  if (kind == "cylinder") {
    const auto v = parse_list(rest, 2, "object");
    if (v[0] <= 0 || v[1] <= 0) throw ConfigError("object: cylinder dimensions must be positive");
    return Cylinder{v[0], v[1]};
  }
  throw ConfigError("object: expected box:hx,hy,hz or cylinder:r,h");
}

Pose parse_pose(const std::string& s) {
  const auto v = parse_list(s, 6, "pose");
  return {exp_so3(Vec3d(v[0], v[1], v[2])), Vec3d(v[3], v[4], v[5])};
}

SymmetrySpec parse_symmetry(const std::string& s) {
  std::vector<std::pair<Vec3d, Fold>> parts;
  std::istringstream is(s);
  for (std::string tok; std::getline(is, tok, ',');) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos) throw ConfigError("symmetry: expected axis:fold, got '" + tok + "'");
    parts.emplace_back(parse_axis(tok.substr(0, colon)), parse_fold(tok.substr(colon + 1)));
  }
  try {
    if (parts.size() == 1) return {parts[0].first, parts[0].second};
    if (parts.size() == 2) {
      if (parts[1].second.is_infinite()) throw ConfigError("symmetry: secondary fold must be finite");
      return {parts[0].first, parts[0].second, parts[1].first, parts[1].second.order()};
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("symmetry: expected one or two axis:fold entries");
}

int cmd_toy(const ToyArgs& args, std::ostream& out, std::ostream& err) {
  toylab::ExperimentConfig cfg;
  try {
    KeyValues kv;
    if (args.config) kv = read_key_values(*args.config);
    for (const auto& o : args.overrides) {
      std::istringstream line(o);
      for (auto& [k, v] : parse_key_values(line)) kv[k] = v;
    }
    if (args.representation) kv["representations"] = *args.representation;
    apply_experiment_keys(kv, cfg);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kBadConfig;
  }

  namespace fs = std::filesystem;
  const fs::path results = args.out_dir / "results.csv";
  const fs::path manifest_path = args.out_dir / "manifest.txt";
  RunManifest manifest;
  manifest.command = "toy";
  manifest.config = experiment_keys(cfg);
  for (int r = 0; r < cfg.num_restarts; ++r) manifest.seeds.push_back(cfg.seed + static_cast<std::uint64_t>(r));
  manifest.outputs = {{"results", results}, {"sweeps", args.out_dir}, {"manifest", manifest_path}};

  try {
    fs::create_directories(args.out_dir);
    write_manifest_atomic(manifest_path, manifest);
    const auto log = [&](const std::string& msg) {
      if (!args.quiet) err << msg << std::endl;
    };
    const auto rows = toylab::run_study(cfg, log);
    std::ofstream csv(results);
    toylab::write_results_csv(csv, rows);
    for (const auto& row : rows) {
      std::ofstream sweep(args.out_dir / ("sweep_" + std::string(toylab::name(row.representation)) + ".csv"));
      toylab::write_sweep_csv(sweep, row);
    }
    toylab::write_results_csv(out, rows);
  } catch (const toylab::TrainingError& e) {
    err << "error: " << e.what() << '\n';
    return kInvariantViolated;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kBadConfig;
  }
  return kOk;
}

int cmd_roundtrip(const RoundtripArgs& args, std::ostream& out, std::ostream& err) {
  Shape shape;
  Pose pose;
  SymmetrySpec spec;
  try {
    shape = parse_object(args.object);
    pose = parse_pose(args.pose);
    spec = parse_symmetry(args.symmetry);
    if (spec.secondary()) throw ConfigError("roundtrip: two-axis symmetries are not supported by the reverse step");
    if (!(args.noise >= 0)) throw ConfigError("roundtrip: noise must be >= 0");
    if (args.ransac_samples < 1) throw ConfigError("roundtrip: ransac samples must be >= 1");
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kBadConfig;
  }

  const CameraModel cam;
  try {
    if (pose.translation.z() + bounding_radius(shape) <= 0) throw DegenerateError("object is behind the camera");
    const PointMap truth = render_scene(pose, shape, cam).points;
    if (truth.valid_count() == 0) throw DegenerateError("object is not visible");

    std::mt19937_64 rng(args.seed);
    const PointMap star = add_noise(star_map(truth, spec), args.noise, rng);
    const PointMap dash = add_noise(dash_map(truth, pose, cam), args.noise, rng);

    const RansacConfig rc{args.ransac_samples, 1e-6, args.seed};
    const ReverseResult rev = reverse_map(star, dash, spec, cam, rc);
    const PnpResult pnp = solve_pnp(correspondences_from_map(rev.points, cam));
    const PoseError pe = sym_pose_error(pnp.pose, pose, spec);

    out.precision(6);
    out << std::scientific;
    out << "valid_pixels: " << truth.valid_count() << '\n';
    out << "reference_error: " << rev.selection.total_error << '\n';
    out << "map_error: " << map_error_up_to_symmetry(rev.points, truth, spec) << '\n';
    out << "pnp_initial_rms: " << pnp.initial_rms << '\n';
    out << "pnp_final_rms: " << pnp.final_rms << '\n';
    out << "pnp_iterations: " << pnp.iterations << '\n';
    out << "rotation_error: " << pe.rotation << '\n';
    out << "translation_error: " << pe.translation << '\n';

    if (args.dump) {
      std::filesystem::create_directories(*args.dump);
      const std::pair<const char*, const PointMap*> maps[] = {
          {"truth", &truth}, {"star", &star}, {"dash", &dash}, {"recovered", &rev.points}};
      for (const auto& [name, m] : maps) {
        save_point_map(*args.dump / (std::string(name) + ".bin"), *m);
        save_point_map_png(*args.dump / (std::string(name) + ".png"), *m);
      }
    }
  } catch (const DegenerateError& e) {
    err << "degenerate scene: " << e.what() << '\n';
    return kDegenerate;
  } catch (const PnpError& e) {
    err << "pose refinement failed: " << e.what() << " (rms " << e.rms() << " px)\n";
    return kDegenerate;
  }
  return kOk;
}

int cmd_losscheck(const LosscheckArgs& args, std::ostream& out, std::ostream&) {
  using namespace losses;
  std::mt19937_64 rng(args.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::uniform_int_distribution<int> fold_dist(1, 12);
  bool all_ok = true;
  const auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    out << (ok ? "PASS " : "FAIL ") << name << "  " << detail << '\n';
    all_ok = all_ok && ok;
  };
  const auto random_map = [&](int w, int h) {
    DenseMap<2> m(w, h);
    for (int j = 0; j < h; ++j)
      for (int i = 0; i < w; ++i) m.set(i, j, Vec2d(uni(rng), uni(rng)));
    return m;
  };

  {
    int bad = 0;
    for (int t = 0; t < args.trials; ++t) {
      const int n = fold_dist(rng);
      const auto rots = symmetry_rotations(Theta::from_fold(n));
      const DenseMap<2> y = random_map(8, 4), y_hat = random_map(8, 4);
      if (!(pmos_mae<2>(y, y_hat, rots) <= imos_mae<2>(y, y_hat, rots))) ++bad;
    }
    report("pmos_le_imos", bad == 0, std::to_string(args.trials - bad) + "/" + std::to_string(args.trials));
  }
  {
    int bad = 0;
    for (int t = 0; t < args.trials; ++t) {
      const Theta theta = Theta::from_fold(fold_dist(rng));
      const double y = 10 * uni(rng), y_hat = 10 * uni(rng);
      if (!(mos_ae(y, y_hat, theta) <= theta.value() / 2)) ++bad;
    }
    report("mos_ae_bound", bad == 0, std::to_string(args.trials - bad) + "/" + std::to_string(args.trials));
  }
  {
    // Half the pixels rotated by one symmetry, half by another.
    const Theta theta = Theta::from_fold(4);
    const auto rots = symmetry_rotations(theta);
    const DenseMap<2> y = random_map(8, 4);
    DenseMap<2> y_hat(8, 4);
    for (std::size_t k = 0; k < y.size(); ++k) y_hat.set(k, rots[k % 2 ? 1 : 0] * y[k]);
    const double p = pmos_mae<2>(y, y_hat, rots), i = imos_mae<2>(y, y_hat, rots);
    std::ostringstream d;
    d << "pmos=" << p << " imos=" << i;
    report("mixed_equivalent_strict", p < i, d.str());
  }
  {
    const Theta theta = Theta::from_fold(6);
    const auto rots = symmetry_rotations(theta);
    const DenseMap<2> y = random_map(8, 4);
    const DenseMap<2> y_hat = y.transformed([&](const Vec2d& v, int, int) { return Vec2d(rots[2] * v); });
    const double p = pmos_mae<2>(y, y_hat, rots), i = imos_mae<2>(y, y_hat, rots);
    std::ostringstream d;
    d << "pmos=" << p << " imos=" << i;
    report("exact_equivalent_zero", p <= 1e-12 && i <= 1e-12, d.str());
  }
  {
    int bad = 0;
    const Fold folds[] = {Fold::finite(1), Fold::finite(2), Fold::finite(4),
                          Fold::finite(6), Fold::finite(12), Fold::infinite()};
    std::uniform_int_distribution<int> pick(0, 5), kdist(-20, 20);
    for (int t = 0; t < args.trials; ++t) {
      const Fold f = folds[pick(rng)];
      const Vec3d p(uni(rng), uni(rng), uni(rng));
      const double angle = f.is_infinite() ? 10 * uni(rng) : kdist(rng) * f.theta();
      const Vec3d q = rot_z(angle) * p;
      if ((star_point(q, Vec3d::UnitZ(), f) - star_point(p, Vec3d::UnitZ(), f)).norm() > 1e-9) ++bad;
    }
    report("star_invariance", bad == 0, std::to_string(args.trials - bad) + "/" + std::to_string(args.trials));
  }
  return all_ok ? kOk : kInvariantViolated;
}

}  // namespace csl::cli
