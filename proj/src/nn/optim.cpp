// SPDX-License-Identifier: Apache-2.0
#include "handact/nn/optim.hpp"

#include <cmath>

namespace handact::nn {

namespace {

void require_finite_grads(const ParameterList& params) {
  for (Parameter* p : params) {
    if (!p->grad.all_finite()) {
      const std::string name = p->name;
      zero_grads(params);
      throw NnError(NnError::Kind::NonFiniteGradient, "non-finite gradient in " + name);
    }
  }
}

}  // namespace

double SgdSchedule::lr(int epoch) const {
  if (epoch < 0) epoch = 0;
  return base_lr * std::ldexp(1.0, -(epoch / halving_period));
}

void sgd_step(const ParameterList& params, const SgdSchedule& schedule, int epoch) {
  require_finite_grads(params);
  const double lr = schedule.lr(epoch);
  for (Parameter* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) p->value[i] -= lr * p->grad[i];
    p->zero_grad();
  }
}

SgdMomentum::SgdMomentum(const ParameterList& params, double momentum)
    : params_(params), momentum_(momentum) {
  velocity_.reserve(params.size());
  for (Parameter* p : params) velocity_.emplace_back(p->value.shape());
}

void SgdMomentum::step(const SgdSchedule& schedule, int epoch) {
  require_finite_grads(params_);
  const double lr = schedule.lr(epoch);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter& p = *params_[k];
    Tensor& v = velocity_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      v[i] = momentum_ * v[i] + p.grad[i];
      p.value[i] -= lr * v[i];
    }
    p.zero_grad();
  }
}

double clip_grad_norm(const ParameterList& params, double max_norm) {
  double sq = 0.0;
  for (const Parameter* p : params) {
    for (double g : p->grad.values()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && std::isfinite(norm)) {
    const double s = max_norm / norm;
    for (Parameter* p : params) {
      for (double& g : p->grad.values()) g *= s;
    }
  }
  return norm;
}

}  // namespace handact::nn
