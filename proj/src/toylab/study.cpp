#include "csl/toylab/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace csl::toylab {

void ExperimentConfig::validate() const {
  if (representations.empty()) throw std::invalid_argument("config: no representation selected");
  if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
  if (!(learning_rate > 0)) throw std::invalid_argument("config: learning_rate must be positive");
  if (num_restarts < 1 || num_restarts % 2 == 0)
    throw std::invalid_argument("config: num_restarts must be odd and >= 1");
  if (fold < 1) throw std::invalid_argument("config: fold must be >= 1");
  if (width < 16 || width % 16 != 0) throw std::invalid_argument("config: width must be a multiple of 16");
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
}

DenseMap<2> to_map(std::span<const double> flat, int width) {
  DenseMap<2> m(width, 1);
  for (int k = 0; k < width; ++k) m.set(k, 0, Vec2d(flat[k], flat[width + k]));
  return m;
}

RepresentationLoss::RepresentationLoss(Representation r, int fold, int width)
    : rep_(r), theta_(losses::Theta::from_fold(fold)), width_(width),
      rotations_(losses::symmetry_rotations(theta_)) {}

double RepresentationLoss::operator()(const Eigen::VectorXd& target, std::span<const double> out) const {
  std::vector<double> scratch(out.size());
  return (*this)(target, out, scratch);
}

double RepresentationLoss::operator()(const Eigen::VectorXd& t, std::span<const double> out,
                                      std::span<double> grad) const {
  using namespace losses;
  auto vec2 = [](std::span<const double> s) { return Vec2d(s[0], s[1]); };
  switch (rep_) {
    case Representation::NormAngle:
      grad[0] = ae_grad(t[0], out[0]);
      return ae(t[0], out[0]);
    case Representation::Angle:
      grad[0] = mos_ae_grad(t[0], out[0], theta_);
      return mos_ae(t[0], out[0], theta_);
    case Representation::Vector: {
      const Vec2d g = vec_mos_ae_grad(t.head<2>(), vec2(out), theta_);
      grad[0] = g.x();
      grad[1] = g.y();
      return vec_mos_ae(t.head<2>(), vec2(out), theta_);
    }
    case Representation::CslVector: {
      const Vec2d g = vec_ae_grad(t.head<2>(), vec2(out));
      grad[0] = g.x();
      grad[1] = g.y();
      return vec_ae(t.head<2>(), vec2(out));
    }
    default: break;
  }
  const DenseMap<2> y = to_map({t.data(), static_cast<std::size_t>(t.size())}, width_);
  const DenseMap<2> y_hat = to_map(out, width_);
  DenseMap<2> g;
  double loss = 0;
  if (rep_ == Representation::PoImagePmos) {
    loss = pmos_mae<2>(y, y_hat, rotations_);
    g = pmos_mae_grad<2>(y, y_hat, rotations_);
  } else if (rep_ == Representation::PoImageImos) {
    loss = imos_mae<2>(y, y_hat, rotations_);
    g = imos_mae_grad<2>(y, y_hat, rotations_);
  } else {
    loss = mae<2>(y, y_hat);
    g = mae_grad<2>(y, y_hat);
  }
  for (int k = 0; k < width_; ++k) {
    grad[k] = g[k].x();
    grad[width_ + k] = g[k].y();
  }
  return loss;
}

TinyNet make_net(Representation r, int width, std::uint64_t seed) {
  return TinyNet(is_image(r) ? Head::Image : Head::Vector, output_channels(r), width, seed);
}

namespace {

Tensor batch_input(const Dataset& data, std::span<const std::size_t> idx, int width) {
  Tensor x(static_cast<int>(idx.size()), 1, width);
  for (std::size_t b = 0; b < idx.size(); ++b)
    std::copy_n(data.samples[idx[b]].image.data(), width, x.row(static_cast<int>(b), 0));
  return x;
}

std::span<const double> output_row(const Tensor& y, int b) {
  return {y.row(b, 0), static_cast<std::size_t>(y.channels) * y.length};
}

}  // namespace

TrainResult train(TinyNet& net, const Dataset& data, const ExperimentConfig& cfg, std::uint64_t seed) {
  const int width = net.width();
  const RepresentationLoss loss(data.representation, cfg.fold, width);
  Adam adam(net.parameters(), AdamConfig{cfg.learning_rate});
  std::mt19937_64 rng(seed ^ 0x5deece66dULL);
  std::vector<std::size_t> order(data.samples.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult out;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const int bsz = static_cast<int>(idx.size());
      net.zero_grad();
      const Tensor y = net.forward(batch_input(data, idx, width), true);
      Tensor g(y.batch, y.channels, y.length);
      for (int b = 0; b < bsz; ++b) {
        std::span<double> grad(g.row(b, 0), static_cast<std::size_t>(y.channels) * y.length);
        epoch_loss += loss(data.samples[idx[b]].target, output_row(y, b), grad);
        for (auto& v : grad) v /= bsz;
      }
      net.backward(g);
      adam.step();
    }
    epoch_loss /= static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss))
      throw TrainingError("training diverged at epoch " + std::to_string(epoch), epoch);
    out.loss_curve.push_back(epoch_loss);
  }
  return out;
}

std::vector<Eigen::VectorXd> predict(TinyNet& net, const Dataset& data) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(data.samples.size());
  constexpr std::size_t kChunk = 100;
  for (std::size_t start = 0; start < data.samples.size(); start += kChunk) {
    const std::size_t stop = std::min(data.samples.size(), start + kChunk);
    std::vector<std::size_t> idx(stop - start);
    std::iota(idx.begin(), idx.end(), start);
    const Tensor y = net.forward(batch_input(data, idx, net.width()), false);
    for (int b = 0; b < y.batch; ++b) {
      const auto row = output_row(y, b);
      out.emplace_back(Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size())));
    }
  }
  return out;
}

double evaluate_loss(TinyNet& net, const Dataset& data, int fold) {
  const RepresentationLoss loss(data.representation, fold, net.width());
  const auto pred = predict(net, data);
  double sum = 0;
  for (std::size_t k = 0; k < pred.size(); ++k)
    sum += loss(data.samples[k].target, {pred[k].data(), static_cast<std::size_t>(pred[k].size())});
  return sum / static_cast<double>(pred.size());
}

AngleDecoder::AngleDecoder(Representation r, int fold, int width) : rep_(r), fold_(fold), width_(width) {
  if (!is_image(r)) return;
  // The csl image repeats every theta; object point images need the full turn.
  const int entries = r == Representation::CslImage ? 3600 / fold : 3600;
  grid_step_ = kPi<double> / 1800.0;
  table_.reserve(entries);
  for (int k = 0; k < entries; ++k) table_.push_back(make_target(r, k * grid_step_, fold, width));
}

double AngleDecoder::operator()(const Eigen::VectorXd& o) const {
  switch (rep_) {
    case Representation::NormAngle:
    case Representation::Angle: return o[0];
    case Representation::Vector:
    case Representation::CslVector: {
      if (o.head<2>().norm() == 0.0) throw std::domain_error("recover_angle: zero-norm output");
      const double a = std::atan2(o[1], o[0]);
      return rep_ == Representation::CslVector ? a / fold_ : a;
    }
    default: break;
  }
  const int n = static_cast<int>(table_.size());
  std::vector<double> err(n);
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd& t = table_[k];
    double s = 0;
    for (int p = 0; p < width_; ++p) {
      const double dx = t[p] - o[p], dy = t[width_ + p] - o[width_ + p];
      s += std::sqrt(dx * dx + dy * dy);
    }
    err[k] = s / width_;
  }
  const int best = static_cast<int>(std::min_element(err.begin(), err.end()) - err.begin());
  const double e0 = err[best], em = err[(best + n - 1) % n], ep = err[(best + 1) % n];
  const double rise = std::max(em, ep) - e0;
  double offset = rise > 0 ? (em - ep) / (2.0 * rise) : 0.0;
  offset = std::clamp(offset, -0.5, 0.5);
  return (best + offset) * grid_step_;
}

double representation_step(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int pixels) {
  return (a - b).norm() / std::sqrt(static_cast<double>(pixels));
}

StepProfile step_profile(std::span<const Eigen::VectorXd> seq, int pixels) {
  if (seq.size() < 2) return {};
  std::vector<double> steps;
  for (std::size_t k = 1; k < seq.size(); ++k) steps.push_back(representation_step(seq[k - 1], seq[k], pixels));
  StepProfile p;
  p.max_step = *std::max_element(steps.begin(), steps.end());
  auto mid = steps.begin() + static_cast<long>(steps.size() / 2);
  std::nth_element(steps.begin(), mid, steps.end());
  p.median_step = *mid;
  return p;
}

int count_transitions(std::span<const Eigen::VectorXd> seq, int pixels, double nominal_step, double factor) {
  int count = 0;
  bool in_run = false;
  for (std::size_t k = 1; k < seq.size(); ++k) {
    const bool steep = representation_step(seq[k - 1], seq[k], pixels) > factor * nominal_step;
    if (steep && !in_run) ++count;
    in_run = steep;
  }
  return count;
}

namespace {

struct Restart {
  std::uint64_t seed;
  std::optional<TinyNet> net;
  double loss = std::numeric_limits<double>::quiet_NaN();
};

template <typename Fn> void parallel_for(int n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(n);
  for (int t = 0; t < std::min(threads, n); ++t)
    pool.emplace_back([&] {
      for (int i; (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  pool.clear();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

std::vector<StudyRow> run_study(const ExperimentConfig& cfg,
                                const std::function<void(const std::string&)>& log) {
  cfg.validate();
  const DiscTexture tex(cfg.fold, cfg.texture_seed);
  const losses::Theta theta = losses::Theta::from_fold(cfg.fold);
  std::vector<StudyRow> rows;
  for (const Representation rep : cfg.representations) {
    const auto [train_set, test_set] = make_datasets(tex, rep, cfg.width);

    std::vector<Restart> restarts(cfg.num_restarts);
    parallel_for(cfg.num_restarts, cfg.threads, [&](int r) {
      Restart& rs = restarts[r];
      rs.seed = cfg.seed + static_cast<std::uint64_t>(r);
      rs.net.emplace(make_net(rep, cfg.width, rs.seed));
      train(*rs.net, train_set, cfg, rs.seed);
      rs.loss = evaluate_loss(*rs.net, train_set, cfg.fold);
    });

    std::vector<int> order(cfg.num_restarts);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return restarts[a].loss < restarts[b].loss; });
    Restart& median = restarts[order[order.size() / 2]];

    StudyRow row;
    row.representation = rep;
    row.seed_of_median = median.seed;
    row.median_loss = median.loss;
    for (const auto& rs : restarts) row.restart_losses.push_back(rs.loss);

    const auto pred = predict(*median.net, test_set);
    const AngleDecoder decode(rep, cfg.fold, cfg.width);
    double angle_err = 0;
    for (std::size_t k = 0; k < pred.size(); ++k) {
      const double a = decode(pred[k]);
      row.sweep.push_back({test_set.samples[k].alpha, a});
      angle_err += losses::mos_ae(test_set.samples[k].alpha, a, theta);
    }
    row.angle_error = angle_err / static_cast<double>(pred.size());

    row.pixel_error = std::numeric_limits<double>::quiet_NaN();
    if (is_image(rep)) {
      // Each image row is scored with its own per-pixel loss.
      const RepresentationLoss loss(rep, cfg.fold, cfg.width);
      double sum = 0;
      for (std::size_t k = 0; k < pred.size(); ++k)
        sum += loss(test_set.samples[k].target, {pred[k].data(), static_cast<std::size_t>(pred[k].size())});
      row.pixel_error = sum / static_cast<double>(pred.size());
    }

    const int pixels = is_image(rep) ? cfg.width : 1;
    std::vector<Eigen::VectorXd> targets;
    for (const auto& s : test_set.samples) targets.push_back(s.target);
    const double nominal = step_profile(targets, pixels).median_step;
    row.transitions = count_transitions(pred, pixels, nominal);

    if (log) {
      std::ostringstream msg;
      msg << name(rep) << ": angle_error=" << row.angle_error << " pixel_error=" << row.pixel_error
          << " transitions=" << row.transitions << " median_loss=" << row.median_loss;
      log(msg.str());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_results_csv(std::ostream& os, std::span<const StudyRow> rows) {
  os << "representation,loss,pixel_error,angle_error,transitions,seed_of_median\n";
  const auto old = os.precision(10);
  for (const auto& r : rows) {
    os << name(r.representation) << ',' << loss_name(r.representation) << ',';
    if (!std::isnan(r.pixel_error)) os << r.pixel_error;
    os << ',' << r.angle_error << ',' << r.transitions << ',' << r.seed_of_median << '\n';
  }
  os.precision(old);
}

void write_sweep_csv(std::ostream& os, const StudyRow& row) {
  os << "alpha,predicted_angle\n";
  const auto old = os.precision(17);
  for (const auto& p : row.sweep) os << p.alpha << ',' << p.predicted << '\n';
  os.precision(old);
}

}  // namespace csl::toylab
