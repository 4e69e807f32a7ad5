#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

// A small 1-D convolutional network with hand-written backpropagation.
// Activations are laid out batch x channels x length, length fastest.
namespace csl::toylab {

struct Tensor {
  int batch = 0;
  int channels = 0;
  int length = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int b, int c, int l)
      : batch(b), channels(c), length(l), data(static_cast<std::size_t>(b) * c * l, 0.0) {}

  double* row(int b, int c) { return data.data() + (static_cast<std::size_t>(b) * channels + c) * length; }
  const double* row(int b, int c) const {
    return data.data() + (static_cast<std::size_t>(b) * channels + c) * length;
  }
  double& at(int b, int c, int x) { return row(b, c)[x]; }
  double at(int b, int c, int x) const { return row(b, c)[x]; }
};

/// Concatenates along channels.
Tensor concat_channels(const Tensor& a, const Tensor& b);
/// Inverse of concat_channels for gradients: first `channels` go to `a`.
void split_channels(const Tensor& g, int channels, Tensor& a, Tensor& b);

struct Parameter {
  std::vector<double> value;
  std::vector<double> grad;

  explicit Parameter(std::size_t n = 0) : value(n, 0.0), grad(n, 0.0) {}
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x, bool train) = 0;
  /// Accumulates parameter gradients and returns the input gradient.
  virtual Tensor backward(const Tensor& grad) = 0;
  virtual std::vector<Parameter*> parameters() { return {}; }
};

/// Width-k convolution with zero "same" padding.
class Conv1d : public Layer {
 public:
  Conv1d(int in_channels, int out_channels, int kernel, std::mt19937_64& rng);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& grad) override;
  std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

 private:
  int in_, out_, kernel_;
  Parameter weight_;  // out x in x kernel
  Parameter bias_;
  Tensor input_;
};

/// Batch normalization per channel over batch and length. Training uses batch
/// statistics and updates running averages; evaluation uses the averages.
class BatchNorm1d : public Layer {
 public:
  explicit BatchNorm1d(int channels, double momentum = 0.1, double eps = 1e-5);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& grad) override;
  std::vector<Parameter*> parameters() override { return {&gamma_, &beta_}; }

  const std::vector<double>& running_mean() const { return running_mean_; }
  const std::vector<double>& running_var() const { return running_var_; }

 private:
  int channels_;
  double momentum_, eps_;
  Parameter gamma_, beta_;
  std::vector<double> running_mean_, running_var_;
  Tensor xhat_;
  std::vector<double> inv_std_;
  bool trained_pass_ = false;
};

class ReLU : public Layer {
 public:
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& grad) override;

 private:
  Tensor output_;
};

/// Max over non-overlapping pairs; an odd trailing element is dropped.
class MaxPool2 : public Layer {
 public:
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& grad) override;

 private:
  int in_length_ = 0;
  std::vector<int> argmax_;
};

/// Nearest-neighbour upsampling by two.
class Upsample2 : public Layer {
 public:
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& grad) override;
};

/// Fully connected layer over the flattened channels x length input; output
/// is batch x out x 1.
class Linear : public Layer {
 public:
  Linear(int in_features, int out_features, std::mt19937_64& rng);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& grad) override;
  std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }

 private:
  int in_, out_;
  Parameter weight_, bias_;
  Tensor input_;
};

enum class Head { Vector, Image };

/// Encoder of four (conv, BN, ReLU, max-pool) blocks with 4, 6, 8, 8
/// channels. The vector head is FC(4), ReLU, FC(outputs). The image head is a
/// decoder with skip connections, (concat, conv, BN, ReLU, upsample) blocks
/// with 8, 8, 8, 6, 4 channels (no concat in the first, no upsample in the
/// last), and a final convolution to `outputs` channels.
class TinyNet {
 public:
  TinyNet(Head head, int outputs, int width, std::uint64_t seed);
  TinyNet(const TinyNet&) = delete;
  TinyNet& operator=(const TinyNet&) = delete;
  TinyNet(TinyNet&&) = default;
  TinyNet& operator=(TinyNet&&) = default;

  /// x: batch x 1 x width. Returns batch x outputs x 1 (vector head) or
  /// batch x outputs x width (image head).
  Tensor forward(const Tensor& x, bool train);
  /// Gradient of the loss with respect to the forward output.
  void backward(const Tensor& grad);

  std::vector<Parameter*> parameters();
  void zero_grad();
  std::size_t parameter_count();

  Head head() const { return head_; }
  int outputs() const { return outputs_; }
  int width() const { return width_; }

 private:
  struct Block {
    std::unique_ptr<Conv1d> conv;
    std::unique_ptr<BatchNorm1d> bn;
    ReLU relu;
  };

  Head head_;
  int outputs_;
  int width_;
  std::vector<Block> encoder_;
  std::vector<MaxPool2> pools_;
  std::vector<Tensor> skips_;  // encoder activations before pooling
  std::unique_ptr<Linear> fc1_, fc2_;
  ReLU head_relu_;
  std::vector<Block> decoder_;
  std::vector<Upsample2> ups_;
  std::unique_ptr<Conv1d> final_conv_;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig cfg = {});
  void step();

 private:
  std::vector<Parameter*> params_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  long t_ = 0;
};

}  // namespace csl::toylab
