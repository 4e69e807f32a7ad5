#include "csl/toylab/net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csl::toylab {

namespace {

void init_uniform(Parameter& p, int fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : p.value) v = dist(rng);
}

}  // namespace

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.batch != b.batch || a.length != b.length) throw std::invalid_argument("concat: shape mismatch");
  Tensor out(a.batch, a.channels + b.channels, a.length);
  for (int n = 0; n < a.batch; ++n) {
    std::copy_n(a.row(n, 0), static_cast<std::size_t>(a.channels) * a.length, out.row(n, 0));
    std::copy_n(b.row(n, 0), static_cast<std::size_t>(b.channels) * b.length, out.row(n, a.channels));
  }
  return out;
}

void split_channels(const Tensor& g, int channels, Tensor& a, Tensor& b) {
  a = Tensor(g.batch, channels, g.length);
  b = Tensor(g.batch, g.channels - channels, g.length);
  for (int n = 0; n < g.batch; ++n) {
    std::copy_n(g.row(n, 0), static_cast<std::size_t>(channels) * g.length, a.row(n, 0));
    std::copy_n(g.row(n, channels), static_cast<std::size_t>(b.channels) * g.length, b.row(n, 0));
  }
}

// Conv1d

Conv1d::Conv1d(int in_channels, int out_channels, int kernel, std::mt19937_64& rng)
    : in_(in_channels), out_(out_channels), kernel_(kernel),
      weight_(static_cast<std::size_t>(out_channels) * in_channels * kernel), bias_(out_channels) {
  if (kernel % 2 == 0) throw std::invalid_argument("Conv1d: kernel width must be odd");
  init_uniform(weight_, in_channels * kernel, rng);
  init_uniform(bias_, in_channels * kernel, rng);
}

Tensor Conv1d::forward(const Tensor& x, bool) {
  if (x.channels != in_) throw std::invalid_argument("Conv1d: channel mismatch");
  input_ = x;
  const int len = x.length, pad = kernel_ / 2;
  Tensor out(x.batch, out_, len);
  for (int n = 0; n < x.batch; ++n) {
    for (int o = 0; o < out_; ++o) {
      double* y = out.row(n, o);
      std::fill_n(y, len, bias_.value[o]);
      for (int i = 0; i < in_; ++i) {
        const double* in = x.row(n, i);
        const double* w = &weight_.value[(static_cast<std::size_t>(o) * in_ + i) * kernel_];
        for (int k = 0; k < kernel_; ++k) {
          const int off = k - pad;
          const int lo = std::max(0, -off), hi = std::min(len, len - off);
          const double wk = w[k];
          for (int t = lo; t < hi; ++t) y[t] += wk * in[t + off];
        }
      }
    }
  }
  return out;
}

Tensor Conv1d::backward(const Tensor& grad) {
  const Tensor& x = input_;
  const int len = x.length, pad = kernel_ / 2;
  Tensor gin(x.batch, in_, len);
  for (int n = 0; n < x.batch; ++n) {
    for (int o = 0; o < out_; ++o) {
      const double* g = grad.row(n, o);
      double gb = 0;
      for (int t = 0; t < len; ++t) gb += g[t];
      bias_.grad[o] += gb;
      for (int i = 0; i < in_; ++i) {
        const double* in = x.row(n, i);
        double* gi = gin.row(n, i);
        const std::size_t base = (static_cast<std::size_t>(o) * in_ + i) * kernel_;
        for (int k = 0; k < kernel_; ++k) {
          const int off = k - pad;
          const int lo = std::max(0, -off), hi = std::min(len, len - off);
          const double wk = weight_.value[base + k];
          double gw = 0;
          for (int t = lo; t < hi; ++t) {
            gw += g[t] * in[t + off];
            gi[t + off] += wk * g[t];
          }
          weight_.grad[base + k] += gw;
        }
      }
    }
  }
  return gin;
}

// BatchNorm1d

BatchNorm1d::BatchNorm1d(int channels, double momentum, double eps)
    : channels_(channels), momentum_(momentum), eps_(eps), gamma_(channels), beta_(channels),
      running_mean_(channels, 0.0), running_var_(channels, 1.0) {
  std::fill(gamma_.value.begin(), gamma_.value.end(), 1.0);
}

Tensor BatchNorm1d::forward(const Tensor& x, bool train) {
  if (x.channels != channels_) throw std::invalid_argument("BatchNorm1d: channel mismatch");
  const int len = x.length;
  const double count = static_cast<double>(x.batch) * len;
  Tensor out(x.batch, channels_, len);
  xhat_ = Tensor(x.batch, channels_, len);
  inv_std_.assign(channels_, 0.0);
  trained_pass_ = train;
  for (int c = 0; c < channels_; ++c) {
    double mean, var;
    if (train) {
      double s = 0;
      for (int n = 0; n < x.batch; ++n)
        for (int t = 0; t < len; ++t) s += x.at(n, c, t);
      mean = s / count;
      double v = 0;
      for (int n = 0; n < x.batch; ++n)
        for (int t = 0; t < len; ++t) v += (x.at(n, c, t) - mean) * (x.at(n, c, t) - mean);
      var = v / count;
      running_mean_[c] = (1 - momentum_) * running_mean_[c] + momentum_ * mean;
      const double unbiased = count > 1 ? v / (count - 1) : var;
      running_var_[c] = (1 - momentum_) * running_var_[c] + momentum_ * unbiased;
    } else {
      mean = running_mean_[c];
      var = running_var_[c];
    }
    const double is = 1.0 / std::sqrt(var + eps_);
    inv_std_[c] = is;
    const double g = gamma_.value[c], b = beta_.value[c];
    for (int n = 0; n < x.batch; ++n) {
      const double* in = x.row(n, c);
      double* xh = xhat_.row(n, c);
      double* y = out.row(n, c);
      for (int t = 0; t < len; ++t) {
        xh[t] = (in[t] - mean) * is;
        y[t] = g * xh[t] + b;
      }
    }
  }
  return out;
}

Tensor BatchNorm1d::backward(const Tensor& grad) {
  const int len = grad.length;
  const double count = static_cast<double>(grad.batch) * len;
  Tensor gin(grad.batch, channels_, len);
  for (int c = 0; c < channels_; ++c) {
    double sum_g = 0, sum_gx = 0;
    for (int n = 0; n < grad.batch; ++n) {
      const double* g = grad.row(n, c);
      const double* xh = xhat_.row(n, c);
      for (int t = 0; t < len; ++t) {
        sum_g += g[t];
        sum_gx += g[t] * xh[t];
      }
    }
    gamma_.grad[c] += sum_gx;
    beta_.grad[c] += sum_g;
    const double scale = gamma_.value[c] * inv_std_[c];
    for (int n = 0; n < grad.batch; ++n) {
      const double* g = grad.row(n, c);
      const double* xh = xhat_.row(n, c);
      double* gi = gin.row(n, c);
      if (trained_pass_) {
        for (int t = 0; t < len; ++t)
          gi[t] = scale * (g[t] - sum_g / count - xh[t] * sum_gx / count);
      } else {
        for (int t = 0; t < len; ++t) gi[t] = scale * g[t];
      }
    }
  }
  return gin;
}

// ReLU

Tensor ReLU::forward(const Tensor& x, bool) {
  output_ = x;
  for (auto& v : output_.data) v = v > 0 ? v : 0.0;
  return output_;
}

Tensor ReLU::backward(const Tensor& grad) {
  Tensor gin = grad;
  for (std::size_t k = 0; k < gin.data.size(); ++k)
    if (!(output_.data[k] > 0)) gin.data[k] = 0.0;
  return gin;
}

// MaxPool2

Tensor MaxPool2::forward(const Tensor& x, bool) {
  in_length_ = x.length;
  const int len = x.length / 2;
  Tensor out(x.batch, x.channels, len);
  argmax_.assign(out.data.size(), 0);
  std::size_t k = 0;
  for (int n = 0; n < x.batch; ++n)
    for (int c = 0; c < x.channels; ++c) {
      const double* in = x.row(n, c);
      double* y = out.row(n, c);
      for (int t = 0; t < len; ++t, ++k) {
        const bool second = in[2 * t + 1] > in[2 * t];
        argmax_[k] = 2 * t + (second ? 1 : 0);
        y[t] = in[argmax_[k]];
      }
    }
  return out;
}

Tensor MaxPool2::backward(const Tensor& grad) {
  Tensor gin(grad.batch, grad.channels, in_length_);
  std::size_t k = 0;
  for (int n = 0; n < grad.batch; ++n)
    for (int c = 0; c < grad.channels; ++c) {
      const double* g = grad.row(n, c);
      double* gi = gin.row(n, c);
      for (int t = 0; t < grad.length; ++t, ++k) gi[argmax_[k]] += g[t];
    }
  return gin;
}

// Upsample2

Tensor Upsample2::forward(const Tensor& x, bool) {
  Tensor out(x.batch, x.channels, 2 * x.length);
  for (int n = 0; n < x.batch; ++n)
    for (int c = 0; c < x.channels; ++c) {
      const double* in = x.row(n, c);
      double* y = out.row(n, c);
      for (int t = 0; t < x.length; ++t) y[2 * t] = y[2 * t + 1] = in[t];
    }
  return out;
}

Tensor Upsample2::backward(const Tensor& grad) {
  Tensor gin(grad.batch, grad.channels, grad.length / 2);
  for (int n = 0; n < grad.batch; ++n)
    for (int c = 0; c < grad.channels; ++c) {
      const double* g = grad.row(n, c);
      double* gi = gin.row(n, c);
      for (int t = 0; t < gin.length; ++t) gi[t] = g[2 * t] + g[2 * t + 1];
    }
  return gin;
}

// Linear

Linear::Linear(int in_features, int out_features, std::mt19937_64& rng)
    : in_(in_features), out_(out_features),
      weight_(static_cast<std::size_t>(in_features) * out_features), bias_(out_features) {
  init_uniform(weight_, in_features, rng);
  init_uniform(bias_, in_features, rng);
}

Tensor Linear::forward(const Tensor& x, bool) {
  if (x.channels * x.length != in_) throw std::invalid_argument("Linear: feature mismatch");
  input_ = x;
  Tensor out(x.batch, out_, 1);
  for (int n = 0; n < x.batch; ++n) {
    const double* in = x.row(n, 0);
    for (int o = 0; o < out_; ++o) {
      const double* w = &weight_.value[static_cast<std::size_t>(o) * in_];
      double s = bias_.value[o];
      for (int i = 0; i < in_; ++i) s += w[i] * in[i];
      out.at(n, o, 0) = s;
    }
  }
  return out;
}

Tensor Linear::backward(const Tensor& grad) {
  Tensor gin(input_.batch, input_.channels, input_.length);
  for (int n = 0; n < input_.batch; ++n) {
    const double* in = input_.row(n, 0);
    double* gi = gin.row(n, 0);
    for (int o = 0; o < out_; ++o) {
      const double g = grad.at(n, o, 0);
      bias_.grad[o] += g;
      double* gw = &weight_.grad[static_cast<std::size_t>(o) * in_];
      const double* w = &weight_.value[static_cast<std::size_t>(o) * in_];
      for (int i = 0; i < in_; ++i) {
        gw[i] += g * in[i];
        gi[i] += g * w[i];
      }
    }
  }
  return gin;
}

// TinyNet

namespace {

constexpr int kKernel = 5;
constexpr int kEncoderChannels[] = {4, 6, 8, 8};
constexpr int kDecoderChannels[] = {8, 8, 8, 6, 4};
constexpr int kHeadUnits = 4;

}  // namespace

TinyNet::TinyNet(Head head, int outputs, int width, std::uint64_t seed)
    : head_(head), outputs_(outputs), width_(width) {
  if (width % 16 != 0) throw std::invalid_argument("TinyNet: width must be a multiple of 16");
  if (outputs < 1) throw std::invalid_argument("TinyNet: need at least one output");
  std::mt19937_64 rng(seed);
  int cin = 1;
  for (int c : kEncoderChannels) {
    encoder_.push_back({std::make_unique<Conv1d>(cin, c, kKernel, rng), std::make_unique<BatchNorm1d>(c), {}});
    pools_.emplace_back();
    cin = c;
  }
  skips_.resize(encoder_.size());
  if (head == Head::Vector) {
    fc1_ = std::make_unique<Linear>(cin * (width / 16), kHeadUnits, rng);
    fc2_ = std::make_unique<Linear>(kHeadUnits, outputs, rng);
    return;
  }
  for (int b = 0; b < 5; ++b) {
    const int skip = b == 0 ? 0 : kEncoderChannels[4 - b];
    const int c = kDecoderChannels[b];
    decoder_.push_back(
        {std::make_unique<Conv1d>(cin + skip, c, kKernel, rng), std::make_unique<BatchNorm1d>(c), {}});
    if (b < 4) ups_.emplace_back();
    cin = c;
  }
  final_conv_ = std::make_unique<Conv1d>(cin, outputs, kKernel, rng);
}

Tensor TinyNet::forward(const Tensor& x, bool train) {
  if (x.channels != 1 || x.length != width_) throw std::invalid_argument("TinyNet: bad input shape");
  Tensor h = x;
  for (std::size_t b = 0; b < encoder_.size(); ++b) {
    auto& blk = encoder_[b];
    h = blk.relu.forward(blk.bn->forward(blk.conv->forward(h, train), train), train);
    skips_[b] = h;
    h = pools_[b].forward(h, train);
  }
  if (head_ == Head::Vector) return fc2_->forward(head_relu_.forward(fc1_->forward(h, train), train), train);

  for (std::size_t b = 0; b < decoder_.size(); ++b) {
    if (b > 0) h = concat_channels(h, skips_[encoder_.size() - b]);
    auto& blk = decoder_[b];
    h = blk.relu.forward(blk.bn->forward(blk.conv->forward(h, train), train), train);
    if (b < ups_.size()) h = ups_[b].forward(h, train);
  }
  return final_conv_->forward(h, train);
}

void TinyNet::backward(const Tensor& grad) {
  std::vector<Tensor> skip_grads(encoder_.size());
  Tensor g;
  if (head_ == Head::Vector) {
    g = fc1_->backward(head_relu_.backward(fc2_->backward(grad)));
  } else {
    g = final_conv_->backward(grad);
    for (std::size_t b = decoder_.size(); b-- > 0;) {
      if (b < ups_.size()) g = ups_[b].backward(g);
      auto& blk = decoder_[b];
      g = blk.conv->backward(blk.bn->backward(blk.relu.backward(g)));
      if (b > 0) {
        Tensor gd;
        split_channels(g, kDecoderChannels[b - 1], gd, skip_grads[encoder_.size() - b]);
        g = std::move(gd);
      }
    }
  }
  for (std::size_t b = encoder_.size(); b-- > 0;) {
    g = pools_[b].backward(g);
    if (!skip_grads[b].data.empty())
      for (std::size_t k = 0; k < g.data.size(); ++k) g.data[k] += skip_grads[b].data[k];
    auto& blk = encoder_[b];
    g = blk.conv->backward(blk.bn->backward(blk.relu.backward(g)));
  }
}

std::vector<Parameter*> TinyNet::parameters() {
  std::vector<Parameter*> out;
  auto add = [&out](Layer& l) {
    for (auto* p : l.parameters()) out.push_back(p);
  };
  for (auto& b : encoder_) {
    add(*b.conv);
    add(*b.bn);
  }
  if (fc1_) {
    add(*fc1_);
    add(*fc2_);
  }
  for (auto& b : decoder_) {
    add(*b.conv);
    add(*b.bn);
  }
  if (final_conv_) add(*final_conv_);
  return out;
}

void TinyNet::zero_grad() {
  for (auto* p : parameters()) std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

std::size_t TinyNet::parameter_count() {
  std::size_t n = 0;
  for (auto* p : parameters()) n += p->value.size();
  return n;
}

// Adam

Adam::Adam(std::vector<Parameter*> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  for (auto* p : params_) {
    m_.emplace_back(p->value.size(), 0.0);
    v_.emplace_back(p->value.size(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = *params_[k];
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = cfg_.beta1 * m[i] + (1 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1 - cfg_.beta2) * g * g;
      p.value[i] -= cfg_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.eps);
    }
  }
}

}  // namespace csl::toylab
