// SPDX-License-Identifier: Apache-2.0
#include "handact/nn/loss.hpp"

#include <algorithm>
#include <cmath>

namespace handact::nn {

namespace {

void check_targets(const Tensor& logits, std::span<const int> targets) {
  if (logits.rank() != 2 || logits.dim(0) != targets.size()) {
    throw NnError(NnError::Kind::ShapeMismatch,
                  "cross entropy: logits " + shape_string(logits.shape()) + " with " +
                      std::to_string(targets.size()) + " targets");
  }
  for (int t : targets) {
    if (t < 0 || static_cast<std::size_t>(t) >= logits.dim(1)) {
      throw NnError(NnError::Kind::ShapeMismatch, "cross entropy: target " + std::to_string(t) +
                                                      " outside " + std::to_string(logits.dim(1)) +
                                                      " classes");
    }
  }
}

}  // namespace

Tensor softmax(const Tensor& logits) {
  Tensor p = logits;
  const std::size_t classes = logits.cols();
  for (std::size_t b = 0; b < logits.rows(); ++b) {
    auto row = p.row(b);
    const double m = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double& v : row) {
      v = std::exp(v - m);
      sum += v;
    }
    for (std::size_t c = 0; c < classes; ++c) row[c] /= sum;
  }
  return p;
}

std::vector<double> cross_entropy_per_sample(const Tensor& logits, std::span<const int> targets) {
  check_targets(logits, targets);
  std::vector<double> out(targets.size());
  for (std::size_t b = 0; b < targets.size(); ++b) {
    const auto row = logits.row(b);
    const double m = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - m);
    out[b] = std::log(sum) + m - row[static_cast<std::size_t>(targets[b])];
  }
  return out;
}

LossResult softmax_cross_entropy(const Tensor& logits, std::span<const int> targets) {
  const auto per_sample = cross_entropy_per_sample(logits, targets);
  const double inv_batch = 1.0 / static_cast<double>(targets.size());
  LossResult r;
  for (double v : per_sample) r.value += v;
  r.value *= inv_batch;
  r.grad = softmax(logits);
  for (std::size_t b = 0; b < targets.size(); ++b) {
    auto row = r.grad.row(b);
    row[static_cast<std::size_t>(targets[b])] -= 1.0;
    for (double& v : row) v *= inv_batch;
  }
  return r;
}

LossResult l2_loss(const Tensor& pred, const Tensor& target, std::span<const char> mask) {
  if (pred.shape() != target.shape() || pred.rank() != 2 || mask.size() != pred.dim(1)) {
    throw NnError(NnError::Kind::ShapeMismatch,
                  "l2 loss: pred " + shape_string(pred.shape()) + ", target " +
                      shape_string(target.shape()) + ", mask " + std::to_string(mask.size()));
  }
  const double inv_batch = 1.0 / static_cast<double>(pred.dim(0));
  LossResult r;
  r.grad = Tensor(pred.shape());
  for (std::size_t b = 0; b < pred.dim(0); ++b) {
    for (std::size_t v = 0; v < pred.dim(1); ++v) {
      if (!mask[v]) continue;
      const double d = pred.at(b, v) - target.at(b, v);
      r.value += d * d;
      r.grad.at(b, v) = 2.0 * d * inv_batch;
    }
  }
  r.value *= inv_batch;
  return r;
}

std::vector<int> argmax_rows(const Tensor& logits) {
  std::vector<int> out(logits.rows());
  for (std::size_t b = 0; b < logits.rows(); ++b) {
    const auto row = logits.row(b);
    out[b] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

}  // namespace handact::nn
