#pragma once

#include "csl/losses.hpp"
#include "csl/toylab/disc.hpp"
#include "csl/toylab/net.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace csl::toylab {

struct ExperimentConfig {
  std::vector<Representation> representations{std::begin(kAllRepresentations),
                                              std::end(kAllRepresentations)};
  int epochs = 500;
  int batch_size = 10;
  double learning_rate = 1e-3;
  int num_restarts = 11;
  std::uint64_t seed = 1;          // restart r trains with seed + r
  std::uint64_t texture_seed = 7;
  int fold = 6;
  int width = kImageWidth;
  int threads = 1;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, int epoch) : std::runtime_error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// Per-sample loss of a representation and its gradient with respect to the
/// raw network output (flattened channel-major).
class RepresentationLoss {
 public:
  RepresentationLoss(Representation r, int fold, int width);
  double operator()(const Eigen::VectorXd& target, std::span<const double> output,
                    std::span<double> grad) const;
  double operator()(const Eigen::VectorXd& target, std::span<const double> output) const;

 private:
  Representation rep_;
  losses::Theta theta_;
  int width_;
  losses::RotationSet<2> rotations_;
};

DenseMap<2> to_map(std::span<const double> flat, int width);

TinyNet make_net(Representation r, int width, std::uint64_t seed);

struct TrainResult {
  std::vector<double> loss_curve;  // mean training loss per epoch
};

/// Adam on shuffled mini-batches. Deterministic for a given seed. Throws
/// TrainingError when the loss becomes non-finite.
TrainResult train(TinyNet& net, const Dataset& data, const ExperimentConfig& cfg, std::uint64_t seed);

/// Raw outputs in evaluation mode, one row per sample.
std::vector<Eigen::VectorXd> predict(TinyNet& net, const Dataset& data);

/// Mean loss over a dataset in evaluation mode.
double evaluate_loss(TinyNet& net, const Dataset& data, int fold);

/// Converts a raw network output to an angle. Image outputs are matched to a
/// precomputed table of ground-truth images every pi/1800, refined by fitting
/// a V to the neighbouring errors.
class AngleDecoder {
 public:
  AngleDecoder(Representation r, int fold, int width = kImageWidth);
  /// Throws std::domain_error on a zero-norm vector output.
  double operator()(const Eigen::VectorXd& output) const;

 private:
  Representation rep_;
  int fold_;
  int width_;
  double grid_step_ = 0;
  std::vector<Eigen::VectorXd> table_;
};

/// Largest and median distance between consecutive entries.
struct StepProfile {
  double max_step = 0;
  double median_step = 0;
};

/// Step distance between representation values: Euclidean for vectors, RMS of
/// per-pixel distances for images.
double representation_step(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int pixels);
StepProfile step_profile(std::span<const Eigen::VectorXd> sequence, int pixels);

/// Number of maximal runs of consecutive steps larger than
/// `factor * nominal_step`.
int count_transitions(std::span<const Eigen::VectorXd> sequence, int pixels, double nominal_step,
                      double factor = 10.0);

struct SweepPoint {
  double alpha;
  double predicted;
};

struct StudyRow {
  Representation representation;
  double pixel_error;  // NaN for vector outputs
  double angle_error;  // mean symmetry-aware angle error on the test sweep
  int transitions;
  std::uint64_t seed_of_median;
  double median_loss;
  std::vector<double> restart_losses;
  std::vector<SweepPoint> sweep;
};

/// Trains num_restarts nets per representation and evaluates the one with the
/// median final training loss on the test sweep.
std::vector<StudyRow> run_study(const ExperimentConfig& cfg,
                                const std::function<void(const std::string&)>& log = {});

void write_results_csv(std::ostream& os, std::span<const StudyRow> rows);
void write_sweep_csv(std::ostream& os, const StudyRow& row);

}  // namespace csl::toylab
