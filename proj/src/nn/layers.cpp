// SPDX-License-Identifier: Apache-2.0
#include "handact/nn/layers.hpp"

#include <cmath>

#include <Eigen/Core>

namespace handact::nn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMatrix = Eigen::Map<RowMatrix>;
using ConstMapMatrix = Eigen::Map<const RowMatrix>;
using MapVector = Eigen::Map<Eigen::VectorXd>;
using ConstMapVector = Eigen::Map<const Eigen::VectorXd>;

ConstMapMatrix as_matrix(const Tensor& t, std::size_t rows, std::size_t cols) {
  return {t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}
MapMatrix as_matrix(Tensor& t, std::size_t rows, std::size_t cols) {
  return {t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

// He-uniform weights (variance 2 / fan_in) keep ReLU activations from
// shrinking layer by layer; biases start at zero.
void init_he(Tensor& t, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
}

}  // namespace

// ---------------------------------------------------------------- Linear

Linear::Linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng)
    : weight_(name + ".weight", {out, in}), bias_(name + ".bias", {out}) {
  init_he(weight_.value, in, rng);
}

Tensor Linear::forward(const Tensor& x) {
  const std::size_t in = in_features();
  const std::size_t out = out_features();
  if (x.rank() != 2 || x.dim(1) != in) {
    throw NnError(NnError::Kind::ShapeMismatch, weight_.name + ": expected [B, " +
                                                    std::to_string(in) + "] input, got " +
                                                    shape_string(x.shape()));
  }
  input_ = x;
  const std::size_t batch = x.dim(0);
  Tensor y({batch, out});
  auto Y = as_matrix(y, batch, out);
  Y.noalias() = as_matrix(x, batch, in) * as_matrix(weight_.value, out, in).transpose();
  Y.rowwise() += ConstMapVector(bias_.value.data(), static_cast<Eigen::Index>(out)).transpose();
  return y;
}

Tensor Linear::backward(const Tensor& dy) {
  const std::size_t in = in_features();
  const std::size_t out = out_features();
  const std::size_t batch = input_.dim(0);
  require_shape(dy, {batch, out}, "Linear backward");
  const auto DY = as_matrix(dy, batch, out);
  as_matrix(weight_.grad, out, in).noalias() += DY.transpose() * as_matrix(input_, batch, in);
  MapVector(bias_.grad.data(), static_cast<Eigen::Index>(out)) += DY.colwise().sum().transpose();
  Tensor dx({batch, in});
  as_matrix(dx, batch, in).noalias() = DY * as_matrix(weight_.value, out, in);
  return dx;
}

// ---------------------------------------------------------------- ReLU

Tensor ReLU::forward(const Tensor& x) {
  output_ = x;
  for (double& v : output_.values()) v = v > 0.0 ? v : 0.0;
  return output_;
}

Tensor ReLU::backward(const Tensor& dy) const {
  if (dy.size() != output_.size()) throw NnError(NnError::Kind::ShapeMismatch, "ReLU backward");
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!(output_[i] > 0.0)) dx[i] = 0.0;
  }
  return dx;
}

// ---------------------------------------------------------------- Dropout

Dropout::Dropout(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw NnError(NnError::Kind::InvalidRate, "dropout rate must be in [0, 1), got " +
                                                  std::to_string(rate));
  }
}

Tensor Dropout::forward(const Tensor& x, Mode mode) {
  if (mode == Mode::Eval || rate_ == 0.0) {
    mask_ = Tensor();
    return x;
  }
  if (!frozen_ || mask_.shape() != x.shape()) {
    mask_ = Tensor(x.shape());
    const double keep_scale = 1.0 / (1.0 - rate_);
    for (double& m : mask_.values()) m = rng_.uniform() < rate_ ? 0.0 : keep_scale;
  }
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= mask_[i];
  return y;
}

Tensor Dropout::backward(const Tensor& dy) const {
  if (mask_.empty()) return dy;
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= mask_[i];
  return dx;
}

// ---------------------------------------------------------------- BatchNorm1d

BatchNorm1d::BatchNorm1d(const std::string& name, std::size_t features)
    : gamma_(name + ".gamma", {features}),
      beta_(name + ".beta", {features}),
      running_mean_(name + ".running_mean", {features}),
      running_var_(name + ".running_var", {features}) {
  gamma_.value.fill(1.0);
  running_var_.value.fill(1.0);
}

Tensor BatchNorm1d::forward(const Tensor& x, Mode mode) {
  const std::size_t features = gamma_.value.size();
  if (x.rank() != 2 || x.dim(1) != features) {
    throw NnError(NnError::Kind::ShapeMismatch, gamma_.name + ": bad input " + shape_string(x.shape()));
  }
  const std::size_t batch = x.dim(0);
  mode_ = mode;
  xhat_ = Tensor(x.shape());
  inv_std_ = Tensor({features});
  Tensor y(x.shape());
  for (std::size_t f = 0; f < features; ++f) {
    double mean = 0.0;
    double var = 0.0;
    if (mode == Mode::Train) {
      for (std::size_t b = 0; b < batch; ++b) mean += x.at(b, f);
      mean /= static_cast<double>(batch);
      for (std::size_t b = 0; b < batch; ++b) var += (x.at(b, f) - mean) * (x.at(b, f) - mean);
      var /= static_cast<double>(batch);
      const double unbiased = batch > 1 ? var * batch / (batch - 1.0) : var;
      running_mean_.value[f] = (1.0 - kMomentum) * running_mean_.value[f] + kMomentum * mean;
      running_var_.value[f] = (1.0 - kMomentum) * running_var_.value[f] + kMomentum * unbiased;
    } else {
      mean = running_mean_.value[f];
      var = running_var_.value[f];
    }
    const double inv = 1.0 / std::sqrt(var + kEps);
    inv_std_[f] = inv;
    for (std::size_t b = 0; b < batch; ++b) {
      const double xh = (x.at(b, f) - mean) * inv;
      xhat_.at(b, f) = xh;
      y.at(b, f) = gamma_.value[f] * xh + beta_.value[f];
    }
  }
  return y;
}

Tensor BatchNorm1d::backward(const Tensor& dy) {
  require_shape(dy, xhat_.shape(), "BatchNorm1d backward");
  const std::size_t batch = dy.dim(0);
  const std::size_t features = dy.dim(1);
  Tensor dx(dy.shape());
  const double n = static_cast<double>(batch);
  for (std::size_t f = 0; f < features; ++f) {
    double sum_dy = 0.0;
    double sum_dy_xhat = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      sum_dy += dy.at(b, f);
      sum_dy_xhat += dy.at(b, f) * xhat_.at(b, f);
    }
    gamma_.grad[f] += sum_dy_xhat;
    beta_.grad[f] += sum_dy;
    const double g = gamma_.value[f] * inv_std_[f];
    for (std::size_t b = 0; b < batch; ++b) {
      if (mode_ == Mode::Train) {
        dx.at(b, f) = g * (dy.at(b, f) - sum_dy / n - xhat_.at(b, f) * sum_dy_xhat / n);
      } else {
        dx.at(b, f) = g * dy.at(b, f);
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(const std::string& name, std::size_t in_channels, std::size_t out_channels,
               std::size_t kernel, Rng& rng)
    : weight_(name + ".weight", {out_channels, in_channels * kernel * kernel}),
      bias_(name + ".bias", {out_channels}),
      in_channels_(in_channels),
      kernel_(kernel) {
  init_he(weight_.value, in_channels * kernel * kernel, rng);
}

Tensor Conv2d::forward(const Tensor& x) {
  if (x.rank() != 4 || x.dim(1) != in_channels_) {
    throw NnError(NnError::Kind::ShapeMismatch, weight_.name + ": expected [B, " +
                                                    std::to_string(in_channels_) +
                                                    ", H, W], got " + shape_string(x.shape()));
  }
  input_shape_ = x.shape();
  const std::size_t batch = x.dim(0);
  const std::size_t h = x.dim(2);
  const std::size_t w = x.dim(3);
  const std::size_t hw = h * w;
  const std::size_t k = kernel_;
  const auto pad = static_cast<long>(k / 2);
  const std::size_t patch = in_channels_ * k * k;
  const std::size_t out_c = out_channels();

  columns_.resize(batch);
  Tensor y({batch, out_c, h, w});
  for (std::size_t b = 0; b < batch; ++b) {
    Tensor& col = columns_[b];
    if (col.shape() != Shape{patch, hw}) col = Tensor({patch, hw});
    const double* src = x.data() + b * in_channels_ * hw;
    for (std::size_t c = 0; c < in_channels_; ++c) {
      for (std::size_t ky = 0; ky < k; ++ky) {
        for (std::size_t kx = 0; kx < k; ++kx) {
          double* dst = col.data() + ((c * k + ky) * k + kx) * hw;
          for (std::size_t oy = 0; oy < h; ++oy) {
            const long iy = static_cast<long>(oy) + static_cast<long>(ky) - pad;
            for (std::size_t ox = 0; ox < w; ++ox) {
              const long ix = static_cast<long>(ox) + static_cast<long>(kx) - pad;
              const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<long>(h) &&
                                  ix < static_cast<long>(w);
              dst[oy * w + ox] = inside ? src[c * hw + static_cast<std::size_t>(iy) * w +
                                              static_cast<std::size_t>(ix)]
                                        : 0.0;
            }
          }
        }
      }
    }
    auto Y = MapMatrix(y.data() + b * out_c * hw, static_cast<Eigen::Index>(out_c),
                       static_cast<Eigen::Index>(hw));
    Y.noalias() = as_matrix(weight_.value, out_c, patch) * as_matrix(col, patch, hw);
    Y.colwise() += ConstMapVector(bias_.value.data(), static_cast<Eigen::Index>(out_c));
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
  const std::size_t batch = input_shape_[0];
  const std::size_t h = input_shape_[2];
  const std::size_t w = input_shape_[3];
  const std::size_t hw = h * w;
  const std::size_t k = kernel_;
  const auto pad = static_cast<long>(k / 2);
  const std::size_t patch = in_channels_ * k * k;
  const std::size_t out_c = out_channels();
  require_shape(dy, {batch, out_c, h, w}, "Conv2d backward");

  Tensor dx(input_shape_);
  Tensor dcol({patch, hw});
  auto dW = as_matrix(weight_.grad, out_c, patch);
  auto db = MapVector(bias_.grad.data(), static_cast<Eigen::Index>(out_c));
  for (std::size_t b = 0; b < batch; ++b) {
    const auto DY = ConstMapMatrix(dy.data() + b * out_c * hw, static_cast<Eigen::Index>(out_c),
                                   static_cast<Eigen::Index>(hw));
    dW.noalias() += DY * as_matrix(columns_[b], patch, hw).transpose();
    db += DY.rowwise().sum();
    as_matrix(dcol, patch, hw).noalias() = as_matrix(weight_.value, out_c, patch).transpose() * DY;

    double* dst = dx.data() + b * in_channels_ * hw;
    for (std::size_t c = 0; c < in_channels_; ++c) {
      for (std::size_t ky = 0; ky < k; ++ky) {
        for (std::size_t kx = 0; kx < k; ++kx) {
          const double* src = dcol.data() + ((c * k + ky) * k + kx) * hw;
          for (std::size_t oy = 0; oy < h; ++oy) {
            const long iy = static_cast<long>(oy) + static_cast<long>(ky) - pad;
            if (iy < 0 || iy >= static_cast<long>(h)) continue;
            for (std::size_t ox = 0; ox < w; ++ox) {
              const long ix = static_cast<long>(ox) + static_cast<long>(kx) - pad;
              if (ix < 0 || ix >= static_cast<long>(w)) continue;
              dst[c * hw + static_cast<std::size_t>(iy) * w + static_cast<std::size_t>(ix)] +=
                  src[oy * w + ox];
            }
          }
        }
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------- AvgPool2

Tensor AvgPool2::forward(const Tensor& x) {
  if (x.rank() != 4 || x.dim(2) % 2 != 0 || x.dim(3) % 2 != 0) {
    throw NnError(NnError::Kind::ShapeMismatch, "AvgPool2 needs [B, C, even H, even W], got " +
                                                    shape_string(x.shape()));
  }
  input_shape_ = x.shape();
  const std::size_t planes = x.dim(0) * x.dim(1);
  const std::size_t h = x.dim(2);
  const std::size_t w = x.dim(3);
  Tensor y({x.dim(0), x.dim(1), h / 2, w / 2});
  for (std::size_t p = 0; p < planes; ++p) {
    const double* src = x.data() + p * h * w;
    double* dst = y.data() + p * (h / 2) * (w / 2);
    for (std::size_t oy = 0; oy < h / 2; ++oy) {
      for (std::size_t ox = 0; ox < w / 2; ++ox) {
        const double* s = src + 2 * oy * w + 2 * ox;
        dst[oy * (w / 2) + ox] = 0.25 * (s[0] + s[1] + s[w] + s[w + 1]);
      }
    }
  }
  return y;
}

Tensor AvgPool2::backward(const Tensor& dy) const {
  const std::size_t planes = input_shape_[0] * input_shape_[1];
  const std::size_t h = input_shape_[2];
  const std::size_t w = input_shape_[3];
  require_shape(dy, {input_shape_[0], input_shape_[1], h / 2, w / 2}, "AvgPool2 backward");
  Tensor dx(input_shape_);
  for (std::size_t p = 0; p < planes; ++p) {
    const double* src = dy.data() + p * (h / 2) * (w / 2);
    double* dst = dx.data() + p * h * w;
    for (std::size_t oy = 0; oy < h / 2; ++oy) {
      for (std::size_t ox = 0; ox < w / 2; ++ox) {
        const double g = 0.25 * src[oy * (w / 2) + ox];
        double* d = dst + 2 * oy * w + 2 * ox;
        d[0] += g;
        d[1] += g;
        d[w] += g;
        d[w + 1] += g;
      }
    }
  }
  return dx;
}

}  // namespace handact::nn
