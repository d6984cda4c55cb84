// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "handact/common/rng.hpp"
#include "handact/nn/tensor.hpp"

namespace handact::nn {

/// Standard GRU cell:
///   z = sigmoid(x Wz^T + h Uz^T + bz)
///   r = sigmoid(x Wr^T + h Ur^T + br)
///   n = tanh(x Wh^T + (r * h) Uh^T + bh)
///   h' = (1 - z) * h + z * n
class GruCell {
 public:
  struct Cache {
    Tensor x, h, z, r, n, rh;
  };

  GruCell() = default;
  GruCell(const std::string& name, std::size_t input, std::size_t hidden, Rng& rng);

  std::size_t input_size() const { return w_z.value.dim(1); }
  std::size_t hidden_size() const { return w_z.value.dim(0); }

  Tensor step(const Tensor& x, const Tensor& h, Cache* cache) const;
  /// Accumulates parameter gradients; writes d/dx and d/dh of the previous state.
  void step_backward(const Cache& cache, const Tensor& dh_next, Tensor& dx, Tensor& dh);

  ParameterList parameters() { return {&w_z, &u_z, &b_z, &w_r, &u_r, &b_r, &w_h, &u_h, &b_h}; }

  Parameter w_z, u_z, b_z;
  Parameter w_r, u_r, b_r;
  Parameter w_h, u_h, b_h;
};

/// Stacked bidirectional GRU. Output t is [forward state after frames 0..t,
/// backward state after frames N-1..t]; each layer after the first reads the
/// previous layer's concatenated outputs. Initial states are zero.
class BiGru {
 public:
  BiGru() = default;
  BiGru(const std::string& name, std::size_t input, std::size_t hidden, std::size_t layers,
        Rng& rng);

  std::size_t hidden_size() const { return forward_.empty() ? 0 : forward_[0].hidden_size(); }
  std::size_t output_size() const { return 2 * hidden_size(); }
  std::size_t layers() const { return forward_.size(); }

  /// seq[t] is [B, input]; throws EmptySequence for an empty sequence.
  std::vector<Tensor> forward(const std::vector<Tensor>& seq);
  /// d_out[t] is [B, 2H]; returns gradients for each input step.
  std::vector<Tensor> backward(const std::vector<Tensor>& d_out);

  GruCell& forward_cell(std::size_t layer) { return forward_.at(layer); }
  GruCell& backward_cell(std::size_t layer) { return backward_.at(layer); }
  ParameterList parameters();

 private:
  std::vector<GruCell> forward_;
  std::vector<GruCell> backward_;
  // [layer][t] caches of the last forward()
  std::vector<std::vector<GruCell::Cache>> fwd_cache_;
  std::vector<std::vector<GruCell::Cache>> bwd_cache_;
};

}  // namespace handact::nn
