// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "handact/common/rng.hpp"
#include "handact/nn/tensor.hpp"

namespace handact::nn {

// Layers cache what their backward pass needs during forward(), so each
// forward() must be followed by at most one backward() before the next
// forward(). backward() accumulates into parameter gradients and returns the
// gradient with respect to the layer input.

enum class Mode { Train, Eval };

/// y = x W^T + b with W [out, in] and b [out].
class Linear {
 public:
  Linear() = default;
  /// Weights and bias drawn from U(-1/sqrt(in), 1/sqrt(in)).
  Linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

  std::size_t in_features() const { return weight_.value.dim(1); }
  std::size_t out_features() const { return weight_.value.dim(0); }
  ParameterList parameters() { return {&weight_, &bias_}; }
  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

 private:
  Parameter weight_;
  Parameter bias_;
  Tensor input_;
};

class ReLU {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy) const;

 private:
  Tensor output_;
};

/// Inverted dropout: kept units are scaled by 1 / (1 - rate) in training so
/// evaluation is the identity.
class Dropout {
 public:
  explicit Dropout(double rate = 0.0, std::uint64_t seed = 0);

  Tensor forward(const Tensor& x, Mode mode);
  Tensor backward(const Tensor& dy) const;

  double rate() const { return rate_; }
  /// While frozen, training-mode forward reuses the previous mask (finite
  /// difference checks need a fixed function).
  void freeze_mask(bool frozen) { frozen_ = frozen; }
  void reseed(std::uint64_t seed) { rng_ = Rng(seed); }

 private:
  double rate_;
  Rng rng_;
  bool frozen_ = false;
  Tensor mask_;  // scale factor per element; empty means identity
};

/// Batch normalisation over the batch axis of [B, F] inputs.
class BatchNorm1d {
 public:
  static constexpr double kEps = 1e-5;
  static constexpr double kMomentum = 0.1;

  BatchNorm1d() = default;
  BatchNorm1d(const std::string& name, std::size_t features);

  Tensor forward(const Tensor& x, Mode mode);
  Tensor backward(const Tensor& dy);

  ParameterList parameters() { return {&gamma_, &beta_}; }
  const Tensor& running_mean() const { return running_mean_.value; }
  const Tensor& running_var() const { return running_var_.value; }
  /// Running statistics are not trained but belong in checkpoints.
  ParameterList state() { return {&running_mean_, &running_var_}; }

 private:
  Parameter gamma_;
  Parameter beta_;
  Parameter running_mean_;
  Parameter running_var_;
  Mode mode_ = Mode::Train;
  Tensor xhat_;
  Tensor inv_std_;
};

/// 2-D convolution over [B, C, H, W] with square kernels, stride 1 and zero
/// padding that preserves the spatial size.
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(const std::string& name, std::size_t in_channels, std::size_t out_channels,
         std::size_t kernel, Rng& rng);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

  ParameterList parameters() { return {&weight_, &bias_}; }
  std::size_t out_channels() const { return weight_.value.dim(0); }

 private:
  Parameter weight_;  // [out, in * k * k]
  Parameter bias_;    // [out]
  std::size_t in_channels_ = 0;
  std::size_t kernel_ = 0;
  Shape input_shape_;
  std::vector<Tensor> columns_;  // im2col per sample
};

/// Non-overlapping 2x2 average pooling over [B, C, H, W]; H and W must be even.
class AvgPool2 {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy) const;

 private:
  Shape input_shape_;
};

}  // namespace handact::nn
