// SPDX-License-Identifier: Apache-2.0
#include "handact/nn/gru.hpp"

#include <cmath>

#include <Eigen/Core>

namespace handact::nn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMatrix = Eigen::Map<RowMatrix>;
using ConstMapMatrix = Eigen::Map<const RowMatrix>;

ConstMapMatrix mat(const Tensor& t) {
  return {t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}
MapMatrix mat(Tensor& t) {
  return {t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}
Eigen::Map<const Eigen::RowVectorXd> rowvec(const Tensor& t) {
  return {t.data(), static_cast<Eigen::Index>(t.size())};
}
Eigen::Map<Eigen::RowVectorXd> rowvec(Tensor& t) {
  return {t.data(), static_cast<Eigen::Index>(t.size())};
}

Parameter make(const std::string& name, Shape shape, double bound, Rng& rng) {
  Parameter p(name, std::move(shape));
  for (double& v : p.value.values()) v = rng.uniform(-bound, bound);
  return p;
}

// a = x W^T + h U^T + b
Tensor affine(const Tensor& x, const Parameter& w, const Tensor& h, const Parameter& u,
              const Parameter& b) {
  Tensor a({x.rows(), w.value.dim(0)});
  auto A = mat(a);
  A.noalias() = mat(x) * mat(w.value).transpose();
  A.noalias() += mat(h) * mat(u.value).transpose();
  A.rowwise() += rowvec(b.value);
  return a;
}

void accumulate(Parameter& w, Parameter& u, Parameter& b, const Tensor& da, const Tensor& x,
                const Tensor& h) {
  mat(w.grad).noalias() += mat(da).transpose() * mat(x);
  mat(u.grad).noalias() += mat(da).transpose() * mat(h);
  rowvec(b.grad) += mat(da).colwise().sum();
}

}  // namespace

GruCell::GruCell(const std::string& name, std::size_t input, std::size_t hidden, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  w_z = make(name + ".W_z", {hidden, input}, bound, rng);
  u_z = make(name + ".U_z", {hidden, hidden}, bound, rng);
  b_z = make(name + ".b_z", {hidden}, bound, rng);
  w_r = make(name + ".W_r", {hidden, input}, bound, rng);
  u_r = make(name + ".U_r", {hidden, hidden}, bound, rng);
  b_r = make(name + ".b_r", {hidden}, bound, rng);
  w_h = make(name + ".W_h", {hidden, input}, bound, rng);
  u_h = make(name + ".U_h", {hidden, hidden}, bound, rng);
  b_h = make(name + ".b_h", {hidden}, bound, rng);
}

Tensor GruCell::step(const Tensor& x, const Tensor& h, Cache* cache) const {
  const std::size_t hidden = hidden_size();
  if (x.rank() != 2 || x.dim(1) != input_size() || h.rank() != 2 || h.dim(1) != hidden ||
      h.dim(0) != x.dim(0)) {
    throw NnError(NnError::Kind::ShapeMismatch, w_z.name + ": x " + shape_string(x.shape()) +
                                                    ", h " + shape_string(h.shape()));
  }
  Tensor z = affine(x, w_z, h, u_z, b_z);
  Tensor r = affine(x, w_r, h, u_r, b_r);
  for (double& v : z.values()) v = 1.0 / (1.0 + std::exp(-v));
  for (double& v : r.values()) v = 1.0 / (1.0 + std::exp(-v));
  Tensor rh = r;
  for (std::size_t i = 0; i < rh.size(); ++i) rh[i] *= h[i];
  Tensor n = affine(x, w_h, rh, u_h, b_h);
  for (double& v : n.values()) v = std::tanh(v);
  Tensor out(h.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - z[i]) * h[i] + z[i] * n[i];
  if (cache) *cache = Cache{x, h, std::move(z), std::move(r), std::move(n), std::move(rh)};
  return out;
}

void GruCell::step_backward(const Cache& c, const Tensor& dh_next, Tensor& dx, Tensor& dh) {
  require_shape(dh_next, c.h.shape(), "GruCell backward");
  const std::size_t size = dh_next.size();
  Tensor da_z(c.h.shape());
  Tensor da_n(c.h.shape());
  dh = Tensor(c.h.shape());
  for (std::size_t i = 0; i < size; ++i) {
    const double g = dh_next[i];
    dh[i] = g * (1.0 - c.z[i]);
    da_z[i] = g * (c.n[i] - c.h[i]) * c.z[i] * (1.0 - c.z[i]);
    da_n[i] = g * c.z[i] * (1.0 - c.n[i] * c.n[i]);
  }
  accumulate(w_h, u_h, b_h, da_n, c.x, c.rh);
  Tensor d_rh({c.h.rows(), hidden_size()});
  mat(d_rh).noalias() = mat(da_n) * mat(u_h.value);
  Tensor da_r(c.h.shape());
  for (std::size_t i = 0; i < size; ++i) {
    da_r[i] = d_rh[i] * c.h[i] * c.r[i] * (1.0 - c.r[i]);
    dh[i] += d_rh[i] * c.r[i];
  }
  accumulate(w_z, u_z, b_z, da_z, c.x, c.h);
  accumulate(w_r, u_r, b_r, da_r, c.x, c.h);

  dx = Tensor(c.x.shape());
  auto DX = mat(dx);
  DX.noalias() = mat(da_z) * mat(w_z.value);
  DX.noalias() += mat(da_r) * mat(w_r.value);
  DX.noalias() += mat(da_n) * mat(w_h.value);
  auto DH = mat(dh);
  DH.noalias() += mat(da_z) * mat(u_z.value);
  DH.noalias() += mat(da_r) * mat(u_r.value);
}

BiGru::BiGru(const std::string& name, std::size_t input, std::size_t hidden, std::size_t layers,
             Rng& rng) {
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = l == 0 ? input : 2 * hidden;
    forward_.emplace_back(name + ".l" + std::to_string(l) + ".fwd", in, hidden, rng);
    backward_.emplace_back(name + ".l" + std::to_string(l) + ".bwd", in, hidden, rng);
  }
}

ParameterList BiGru::parameters() {
  ParameterList out;
  for (std::size_t l = 0; l < forward_.size(); ++l) {
    for (Parameter* p : forward_[l].parameters()) out.push_back(p);
    for (Parameter* p : backward_[l].parameters()) out.push_back(p);
  }
  return out;
}

std::vector<Tensor> BiGru::forward(const std::vector<Tensor>& seq) {
  if (seq.empty()) throw NnError(NnError::Kind::EmptySequence, "bidirectional GRU: empty sequence");
  const std::size_t steps = seq.size();
  const std::size_t batch = seq[0].rows();
  const std::size_t hidden = hidden_size();
  fwd_cache_.assign(layers(), std::vector<GruCell::Cache>(steps));
  bwd_cache_.assign(layers(), std::vector<GruCell::Cache>(steps));

  std::vector<Tensor> current = seq;
  for (std::size_t l = 0; l < layers(); ++l) {
    std::vector<Tensor> out(steps, Tensor({batch, 2 * hidden}));
    Tensor h({batch, hidden});
    for (std::size_t t = 0; t < steps; ++t) {
      h = forward_[l].step(current[t], h, &fwd_cache_[l][t]);
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t j = 0; j < hidden; ++j) out[t].at(b, j) = h.at(b, j);
      }
    }
    h = Tensor({batch, hidden});
    for (std::size_t t = steps; t-- > 0;) {
      h = backward_[l].step(current[t], h, &bwd_cache_[l][t]);
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t j = 0; j < hidden; ++j) out[t].at(b, hidden + j) = h.at(b, j);
      }
    }
    current = std::move(out);
  }
  return current;
}

std::vector<Tensor> BiGru::backward(const std::vector<Tensor>& d_out) {
  const std::size_t steps = d_out.size();
  if (fwd_cache_.empty() || fwd_cache_[0].size() != steps) {
    throw NnError(NnError::Kind::ShapeMismatch, "bidirectional GRU backward: step count differs");
  }
  const std::size_t batch = d_out[0].rows();
  const std::size_t hidden = hidden_size();
  std::vector<Tensor> grad = d_out;
  for (std::size_t l = layers(); l-- > 0;) {
    const std::size_t in = forward_[l].input_size();
    std::vector<Tensor> d_in(steps, Tensor({batch, in}));
    Tensor dh({batch, hidden});
    Tensor dx;
    Tensor dh_prev;
    for (std::size_t t = steps; t-- > 0;) {
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t j = 0; j < hidden; ++j) dh.at(b, j) += grad[t].at(b, j);
      }
      forward_[l].step_backward(fwd_cache_[l][t], dh, dx, dh_prev);
      add_inplace(d_in[t], dx);
      dh = std::move(dh_prev);
    }
    dh = Tensor({batch, hidden});
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t j = 0; j < hidden; ++j) dh.at(b, j) += grad[t].at(b, hidden + j);
      }
      backward_[l].step_backward(bwd_cache_[l][t], dh, dx, dh_prev);
      add_inplace(d_in[t], dx);
      dh = std::move(dh_prev);
    }
    grad = std::move(d_in);
  }
  return grad;
}

}  // namespace handact::nn
