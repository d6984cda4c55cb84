// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "handact/nn/tensor.hpp"

namespace handact::nn {

/// Step decay: the learning rate halves every `halving_period` epochs.
struct SgdSchedule {
  double base_lr = 0.001;
  int halving_period = 50;

  double lr(int epoch) const;
};

/// p <- p - lr(epoch) * grad, then grads are zeroed. Throws NonFiniteGradient
/// (after zeroing, with parameters untouched) if any gradient is not finite.
void sgd_step(const ParameterList& params, const SgdSchedule& schedule, int epoch);

/// Heavy-ball variant: v <- mu v + grad; p <- p - lr v. mu = 0 reproduces sgd_step.
class SgdMomentum {
 public:
  SgdMomentum(const ParameterList& params, double momentum);
  void step(const SgdSchedule& schedule, int epoch);

 private:
  ParameterList params_;
  double momentum_;
  std::vector<Tensor> velocity_;
};

/// Scales all gradients so their joint L2 norm is at most max_norm. Returns
/// the norm before scaling.
double clip_grad_norm(const ParameterList& params, double max_norm);

}  // namespace handact::nn
