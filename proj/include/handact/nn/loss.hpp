// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "handact/nn/tensor.hpp"

namespace handact::nn {

struct LossResult {
  double value = 0.0;
  Tensor grad;  // d value / d input, same shape as the input
};

/// Row-wise softmax of [B, C] logits, max-shifted.
Tensor softmax(const Tensor& logits);

/// Mean over the batch of -log softmax(logits)[b, target[b]].
LossResult softmax_cross_entropy(const Tensor& logits, std::span<const int> targets);

/// Per-sample negative log-likelihood without reduction.
std::vector<double> cross_entropy_per_sample(const Tensor& logits, std::span<const int> targets);

/// Sum over unmasked columns of (pred - target)^2, averaged over the batch.
/// mask has one entry per column; zero excludes the column.
LossResult l2_loss(const Tensor& pred, const Tensor& target, std::span<const char> mask);

/// Index of the largest entry in each row (first on ties).
std::vector<int> argmax_rows(const Tensor& logits);

}  // namespace handact::nn
