// Runs the end-to-end acceptance checks and prints one PASS/FAIL line each.

#include "csl/losses.hpp"
#include "csl/pnp.hpp"
#include "csl/render.hpp"
#include "csl/reverse.hpp"
#include "csl/symmetry.hpp"
#include "csl/toylab/study.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

using namespace csl;
using namespace csl::toylab;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

constexpr double kPiD = kPi<double>;

// ---------------------------------------------------------------- round trip

Mat3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  return q.normalized().toRotationMatrix();
}

Outcome roundtrip() {
  struct Case {
    const char* label;
    Shape shape;
    SymmetrySpec spec;
  };
  const Case cases[] = {
      {"box4", Box{Vec3d(0.1, 0.1, 0.15)}, SymmetrySpec(Vec3d::UnitZ(), Fold::finite(4))},
      {"box2", Box{Vec3d(0.08, 0.12, 0.15)}, SymmetrySpec(Vec3d::UnitZ(), Fold::finite(2))},
      {"cylinder", Cylinder{0.08, 0.12}, SymmetrySpec(Vec3d::UnitZ(), Fold::infinite())},
  };
  const CameraModel cam;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> depth(0.8, 1.5), lateral(-1, 1);
  const auto start = std::chrono::steady_clock::now();
  std::ostringstream detail;
  detail.precision(2);
  detail << std::scientific;
  bool pass = true;
  for (const auto& c : cases) {
    double worst_map = 0, worst_rot = 0, worst_trans = 0;
    int failures = 0;
    for (int t = 0; t < 100; ++t) {
      Pose pose;
      pose.rotation = random_rotation(rng);
      const double z = depth(rng);
      pose.translation = Vec3d(0.1 * z * lateral(rng), 0.07 * z * lateral(rng), z);
      try {
        const PointMap truth = render_scene(pose, c.shape, cam).points;
        const ReverseResult rev =
            reverse_map(star_map(truth, c.spec), dash_map(truth, pose, cam), c.spec, cam, RansacConfig{16, 1e-6, 7});
        const PnpResult pnp = solve_pnp(correspondences_from_map(rev.points, cam));
        const PoseError pe = sym_pose_error(pnp.pose, pose, c.spec);
        worst_map = std::max(worst_map, map_error_up_to_symmetry(rev.points, truth, c.spec));
        worst_rot = std::max(worst_rot, pe.rotation);
        worst_trans = std::max(worst_trans, pe.translation);
      } catch (const std::exception& e) {
        ++failures;
        std::cerr << c.label << " pose " << t << ": " << e.what() << '\n';
      }
    }
    pass = pass && failures == 0 && worst_map < 1e-6 && worst_rot < 1e-6 && worst_trans < 1e-6;
    detail << c.label << " map " << worst_map << " rot " << worst_rot << " trans " << worst_trans;
    if (failures) detail << " failures " << failures;
    detail << "; ";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  detail << std::fixed << "time " << secs << " s";
  return {pass && secs < 60, detail.str()};
}

// ------------------------------------------------------------ loss invariants

DenseMap<2> random_map(int w, int h, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  DenseMap<2> m(w, h);
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) m.set(i, j, Vec2d(u(rng), u(rng)));
  return m;
}

Outcome loss_inequality() {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> fold(1, 12);
  int ok = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto rots = losses::symmetry_rotations(losses::Theta::from_fold(fold(rng)));
    const DenseMap<2> y = random_map(16, 4, rng), y_hat = random_map(16, 4, rng);
    ok += losses::pmos_mae<2>(y, y_hat, rots) <= losses::imos_mae<2>(y, y_hat, rots);
  }
  return {ok == 1000, std::to_string(ok) + "/1000 pairs"};
}

Outcome star_invariance() {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<int> pick(0, 5), kdist(-50, 50);
  const Fold folds[] = {Fold::finite(1), Fold::finite(2),  Fold::finite(4),
                        Fold::finite(6), Fold::finite(12), Fold::infinite()};
  double worst = 0;
  for (int t = 0; t < 10000; ++t) {
    const Fold f = folds[pick(rng)];
    const Vec3d axis = Vec3d(u(rng), u(rng), u(rng)).normalized();
    const Vec3d p(u(rng), u(rng), u(rng));
    const double angle = f.is_infinite() ? kPiD * u(rng) * 10 : kdist(rng) * f.theta();
    const Vec3d q = Eigen::AngleAxisd(angle, axis) * p;
    worst = std::max(worst, (star_point(q, axis, f) - star_point(p, axis, f)).norm());
  }
  std::ostringstream d;
  d << "max deviation " << worst << " over 10000 samples";
  return {worst <= 1e-9, d.str()};
}

Outcome mos_ae_bound() {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-20, 20);
  std::uniform_int_distribution<int> fold(1, 12);
  int ok = 0;
  for (int t = 0; t < 10000; ++t) {
    const losses::Theta theta = losses::Theta::from_fold(fold(rng));
    ok += losses::mos_ae(u(rng), u(rng), theta) <= theta.value() / 2;
  }
  return {ok == 10000, std::to_string(ok) + "/10000 pairs"};
}

// ------------------------------------------------------------ gradient checks

struct GradCheck {
  double worst = 0;
  int checked = 0;
  int skipped = 0;
  // Central differences at h and 2h disagree when a kink lies within reach.
  bool smooth(double fd, double fd2) {
    if (std::abs(fd - fd2) <= 1e-6 * std::max(1.0, std::abs(fd))) return true;
    ++skipped;
    return false;
  }
  void add(double analytic, double numeric) {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
    worst = std::max(worst, std::abs(analytic - numeric) / scale);
    ++checked;
  }
};

Tensor random_tensor(int b, int c, int l, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Tensor t(b, c, l);
  for (auto& v : t.data) v = u(rng);
  return t;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

constexpr double kStep = 1e-6;

void check_layer(Layer& layer, Tensor x, std::mt19937_64& rng, GradCheck& gc) {
  const auto fwd = [&](const Tensor& in) { return layer.forward(in, true); };
  const Tensor g = [&] {
    const Tensor y = fwd(x);
    return random_tensor(y.batch, y.channels, y.length, rng);
  }();
  for (auto* p : layer.parameters()) std::fill(p->grad.begin(), p->grad.end(), 0.0);
  fwd(x);
  const Tensor dx = layer.backward(g);
  const auto diff = [&](double& slot, double h) {
    const double keep = slot;
    slot = keep + h;
    const double up = dot(g, fwd(x));
    slot = keep - h;
    const double down = dot(g, fwd(x));
    slot = keep;
    return (up - down) / (2 * h);
  };
  const auto probe = [&](double& slot, double analytic) {
    const double fd = diff(slot, kStep);
    if (gc.smooth(fd, diff(slot, 2 * kStep))) gc.add(analytic, fd);
  };
  for (std::size_t i = 0; i < x.data.size(); ++i) probe(x.data[i], dx.data[i]);
  for (auto* p : layer.parameters())
    for (std::size_t i = 0; i < p->value.size(); ++i) probe(p->value[i], p->grad[i]);
}

void check_net(Head head, std::mt19937_64& rng, GradCheck& gc) {
  TinyNet net(head, 2, 32, 5);
  const Tensor x = random_tensor(4, 1, 32, rng);
  const Tensor g = [&] {
    const Tensor y = net.forward(x, true);
    return random_tensor(y.batch, y.channels, y.length, rng);
  }();
  net.zero_grad();
  net.forward(x, true);
  net.backward(g);
  const auto diff = [&](double& slot, double h) {
    const double keep = slot;
    slot = keep + h;
    const double up = dot(g, net.forward(x, true));
    slot = keep - h;
    const double down = dot(g, net.forward(x, true));
    slot = keep;
    return (up - down) / (2 * h);
  };
  for (auto* p : net.parameters())
    for (std::size_t i = 0; i < p->value.size(); i += 5) {
      const double fd = diff(p->value[i], kStep);
      if (gc.smooth(fd, diff(p->value[i], 2 * kStep))) gc.add(p->grad[i], fd);
    }
}

Outcome gradient_checks() {
  std::mt19937_64 rng(14);
  std::map<std::string, GradCheck> checks;
  {
    Conv1d conv(3, 4, 5, rng);
    check_layer(conv, random_tensor(2, 3, 12, rng), rng, checks["conv1d"]);
    BatchNorm1d bn(3);
    std::uniform_real_distribution<double> pos(0.5, 1.5);
    for (auto* p : bn.parameters())
      for (auto& v : p->value) v = pos(rng);
    check_layer(bn, random_tensor(3, 3, 5, rng), rng, checks["batchnorm"]);
    ReLU relu;
    check_layer(relu, random_tensor(2, 3, 8, rng), rng, checks["relu"]);
    MaxPool2 pool;
    check_layer(pool, random_tensor(2, 3, 8, rng), rng, checks["maxpool"]);
    Upsample2 up;
    check_layer(up, random_tensor(2, 3, 4, rng), rng, checks["upsample"]);
    Linear fc(12, 5, rng);
    check_layer(fc, random_tensor(3, 3, 4, rng), rng, checks["linear"]);
    check_net(Head::Vector, rng, checks["tinynet-vector"]);
    check_net(Head::Image, rng, checks["tinynet-image"]);
  }
  // Losses, through the same adapter the training loop uses.
  std::uniform_real_distribution<double> u(-1, 1), angle(0, 2 * kPiD);
  for (Representation r : kAllRepresentations) {
    const int width = 16;
    const RepresentationLoss loss(r, 6, width);
    GradCheck& gc = checks[std::string(loss_name(r)) + "(" + std::string(name(r)) + ")"];
    for (int t = 0; t < 20; ++t) {
      const Eigen::VectorXd target = make_target(r, angle(rng), 6, width);
      std::vector<double> out(target.size()), grad(target.size());
      for (auto& v : out) v = u(rng);
      loss(target, out, grad);
      for (std::size_t i = 0; i < out.size(); ++i) {
        auto plus = out, minus = out, plus2 = out, minus2 = out;
        plus[i] += kStep;
        minus[i] -= kStep;
        plus2[i] += 2 * kStep;
        minus2[i] -= 2 * kStep;
        const double fd = (loss(target, plus) - loss(target, minus)) / (2 * kStep);
        const double fd2 = (loss(target, plus2) - loss(target, minus2)) / (4 * kStep);
        if (gc.smooth(fd, fd2)) gc.add(grad[i], fd);
      }
    }
  }
  bool pass = true;
  std::ostringstream d;
  d.precision(1);
  d << std::scientific;
  for (const auto& [label, gc] : checks) {
    pass = pass && gc.checked > 0 && gc.worst < 1e-4;
    d << label << " " << gc.worst << " (" << gc.checked;
    if (gc.skipped) d << ", " << gc.skipped << " at kinks";
    d << "); ";
  }
  return {pass, d.str()};
}

// ----------------------------------------------------------------- toy study

const StudyRow& row_for(const std::vector<StudyRow>& rows, Representation r) {
  for (const auto& row : rows)
    if (row.representation == r) return row;
  throw std::logic_error("missing representation");
}

Outcome toy_study(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  const auto rows = run_study(cfg, [](const std::string& msg) { std::cerr << msg << std::endl; });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream csv(out_dir / "results.csv");
    write_results_csv(csv, rows);
    for (const auto& row : rows) {
      std::ofstream sweep(out_dir / ("sweep_" + std::string(name(row.representation)) + ".csv"));
      write_sweep_csv(sweep, row);
    }
  }
  write_results_csv(std::cout, rows);

  using R = Representation;
  const auto err = [&](R r) { return row_for(rows, r).angle_error; };
  const auto trans = [&](R r) { return row_for(rows, r).transitions; };
  const bool a = err(R::CslVector) < err(R::NormAngle) && err(R::NormAngle) < err(R::Angle) &&
                 err(R::NormAngle) < err(R::Vector);
  const bool b = err(R::CslImage) < err(R::PoImageImos) && err(R::PoImageImos) < err(R::PoImagePmos);
  const bool c = trans(R::CslVector) == 0 && trans(R::CslImage) == 0 && trans(R::NormAngle) >= 1 &&
                 trans(R::Angle) >= 2;
  std::ostringstream d;
  d << "(a) " << (a ? "ok" : "violated") << " (b) " << (b ? "ok" : "violated") << " (c) "
    << (c ? "ok" : "violated") << "; time " << std::fixed << std::setprecision(0) << secs << " s";
  return {a && b && c, d.str()};
}

Outcome continuity_probe(const ExperimentConfig& cfg) {
  const DiscTexture tex(cfg.fold, cfg.texture_seed);
  const auto targets = [&](Representation r) {
    std::vector<Eigen::VectorXd> seq;
    for (const auto& s : make_datasets(tex, r, cfg.width).second.samples) seq.push_back(s.target);
    return seq;
  };
  const StepProfile csl = step_profile(targets(Representation::CslVector), 1);
  const StepProfile norm = step_profile(targets(Representation::NormAngle), 1);
  const double theta = 2 * kPiD / cfg.fold;
  std::ostringstream d;
  d << "csl max/median " << csl.max_step / csl.median_step << ", normalized-angle max step " << norm.max_step
    << " vs theta/2 " << theta / 2;
  return {csl.max_step < 10 * csl.median_step && norm.max_step >= theta / 2, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"End-to-end acceptance checks"};
  ExperimentConfig cfg;
  std::filesystem::path out_dir;
  bool skip_study = false;
  app.add_option("--threads", cfg.threads, "Parallel restarts in the toy study")->capture_default_str();
  app.add_option("--epochs", cfg.epochs, "Toy study epochs")->capture_default_str();
  app.add_option("--out", out_dir, "Directory for the toy study CSV files");
  app.add_flag("--skip-study", skip_study, "Report the toy study as skipped");
  CLI11_PARSE(app, argc, argv);

  bool all = true;
  const auto run = [&](int id, const char* label, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << id << ' ' << label << ": " << o.detail << std::endl;
  };

  run(1, "roundtrip", roundtrip);
  run(2, "pmos<=imos", loss_inequality);
  run(3, "star invariance", star_invariance);
  run(4, "gradient checks", gradient_checks);
  if (skip_study)
    std::cout << "SKIP 5 toy study" << std::endl;
  else
    run(5, "toy study", [&] { return toy_study(cfg, out_dir); });
  run(6, "continuity probe", [&] { return continuity_probe(cfg); });
  run(7, "mos-ae bound", mos_ae_bound);
  return all ? 0 : 1;
}
