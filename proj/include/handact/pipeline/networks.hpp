// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "handact/common/rng.hpp"
#include "handact/nn/layers.hpp"

namespace handact::pipeline {

using nn::Mode;
using nn::ParameterList;
using nn::Tensor;

/// Linear layer with optional ReLU and dropout after it.
class Dense {
 public:
  Dense() = default;
  Dense(const std::string& name, std::size_t in, std::size_t out, bool relu, double dropout,
        std::uint64_t dropout_seed, Rng& rng);

  Tensor forward(const Tensor& x, Mode mode);
  Tensor backward(const Tensor& dy);
  ParameterList parameters() { return linear_.parameters(); }
  nn::Linear& linear() { return linear_; }
  nn::Dropout& dropout() { return dropout_; }
  std::size_t out_features() const { return linear_.out_features(); }

 private:
  nn::Linear linear_;
  bool relu_ = false;
  nn::ReLU act_;
  nn::Dropout dropout_;
};

/// Patch encoder: conv3x3 -> relu -> pool -> conv3x3 -> relu -> pool -> linear -> relu.
class Backbone {
 public:
  Backbone() = default;
  Backbone(const std::string& name, std::size_t patch_size, std::size_t c1, std::size_t c2,
           std::size_t features, Rng& rng);

  /// patches [B, 3, P, P] -> [B, features]
  Tensor forward(const Tensor& patches);
  void backward(const Tensor& d_features);
  ParameterList parameters();
  std::size_t patch_size() const { return patch_; }

 private:
  std::size_t patch_ = 0;
  nn::Conv2d conv1_, conv2_;
  nn::ReLU relu1_, relu2_;
  nn::AvgPool2 pool1_, pool2_;
  nn::Shape pooled_shape_;
  Dense fc_;
};

struct LocalOutput {
  Tensor grasp_logits;  // [B, C_h]
  Tensor curvature;     // [B, V], empty without a curvature head
  Tensor embedding;     // [B, grasp_embedding]
};

/// Grasp classifier with a curvature regressor reading the backbone feature
/// and the classifier's penultimate activation.
class LocalNet {
 public:
  LocalNet() = default;
  LocalNet(std::size_t features, std::size_t hidden, std::size_t embedding, std::size_t grasp_classes,
           std::size_t curvature_hidden, std::size_t vertices, bool with_curvature, Rng& rng);

  LocalOutput forward(const Tensor& features);
  /// d_curvature is ignored without a curvature head; d_embedding may be empty.
  Tensor backward(const Tensor& d_logits, const Tensor& d_embedding, const Tensor& d_curvature);
  ParameterList parameters();
  bool has_curvature() const { return with_curvature_; }
  std::size_t embedding_width() const { return fc2_.out_features(); }

 private:
  bool with_curvature_ = false;
  std::size_t features_ = 0;
  Dense fc1_, fc2_, head_;
  Dense curv1_, curv2_;
};

/// Interaction embedding from concatenated hand and object features.
class RelationNet {
 public:
  RelationNet() = default;
  RelationNet(std::size_t hand_features, std::size_t object_features, std::size_t hidden,
              std::size_t embedding, Rng& rng);

  Tensor forward(const Tensor& hand, const Tensor& object);
  /// Returns {d_hand, d_object}.
  std::pair<Tensor, Tensor> backward(const Tensor& d_embedding);
  ParameterList parameters();

 private:
  std::size_t hand_ = 0, object_ = 0;
  Dense fc1_, fc2_;
};

struct ObjectOutput {
  Tensor logits;     // [B, C_o]
  Tensor embedding;  // [B, embedding]
};

class ObjectNet {
 public:
  ObjectNet() = default;
  ObjectNet(std::size_t features, std::size_t embedding, std::size_t classes, Rng& rng);

  ObjectOutput forward(const Tensor& features);
  Tensor backward(const Tensor& d_logits, const Tensor& d_embedding);
  ParameterList parameters();

 private:
  Dense embed_, head_;
};

/// Widths of the mixture input in canonical order:
/// grasp embedding, curvature (0 when absent), interaction, object embedding, global.
struct MixtureInputs {
  std::size_t grasp_embedding = 0;
  std::size_t curvature = 0;
  std::size_t interaction = 0;
  std::size_t object_embedding = 0;
  std::size_t global = 0;

  std::vector<std::size_t> widths() const;
  std::size_t total() const;
};

struct MixtureOutput {
  Tensor embedding;  // [B, width]
  Tensor logits;     // [B, C_a]
};

class MixtureNet {
 public:
  MixtureNet() = default;
  MixtureNet(const MixtureInputs& inputs, std::size_t width, std::size_t action_classes,
             double dropout, std::uint64_t seed, Rng& rng);

  /// Parts in canonical order; empty curvature when the layout has none.
  MixtureOutput forward(const std::vector<const Tensor*>& parts, Mode mode);
  /// Returns one gradient per input part (canonical order).
  std::vector<Tensor> backward(const Tensor& d_logits, const Tensor& d_embedding);
  ParameterList parameters();
  const MixtureInputs& inputs() const { return inputs_; }
  void freeze_dropout(bool frozen);

 private:
  MixtureInputs inputs_;
  Dense fc1_, fc2_, fc3_, head_;
};

}  // namespace handact::pipeline
