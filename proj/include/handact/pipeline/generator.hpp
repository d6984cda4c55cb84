// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "handact/nn/loss.hpp"
#include "handact/pipeline/config.hpp"
#include "handact/pipeline/networks.hpp"

namespace handact::pipeline {

/// Inputs and targets for B frames.
struct FrameBatch {
  Tensor hand;                   // [B, 3, P, P]
  Tensor object;                 // [B, 3, P, P], zero rows where absent
  std::vector<char> has_object;  // [B]
  Tensor global;                 // [B, 79]
  std::vector<int> grasp;
  std::vector<int> object_id;
  std::vector<int> action;
  Tensor curvature;              // [B, V]; may be empty without a curvature head
  std::vector<char> vertex_mask; // [V]; nonzero entries enter the regression loss

  std::size_t size() const { return grasp.size(); }
};

struct GeneratorOutput {
  LocalOutput local;
  ObjectOutput object;
  Tensor interaction;
  MixtureOutput mixture;
};

/// Gradients of the joint objective with respect to every head output.
struct GeneratorGrads {
  Tensor grasp_logits;
  Tensor curvature;
  Tensor object_logits;
  Tensor action_logits;
};

/// Hand and object backbones, local, relation, object and mixture networks.
class FrameGenerator {
 public:
  FrameGenerator() = default;
  FrameGenerator(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  bool has_curvature() const { return local_.has_curvature(); }
  std::size_t embedding_width() const { return static_cast<std::size_t>(config_.mixture_width); }

  // Stage A pieces.
  LocalOutput forward_local(const Tensor& hand_patches);
  void backward_local(const Tensor& d_grasp_logits, const Tensor& d_curvature);
  ObjectOutput forward_object(const Tensor& object_patches, std::span<const char> has_object);
  void backward_object(const Tensor& d_object_logits);

  GeneratorOutput forward(const FrameBatch& batch, Mode mode);
  void backward(const GeneratorGrads& grads);

  ParameterList parameters();
  ParameterList local_parameters();
  ParameterList object_parameters();
  MixtureNet& mixture() { return mixture_; }

 private:
  ModelConfig config_;
  Backbone hand_backbone_, object_backbone_;
  LocalNet local_;
  RelationNet relation_;
  ObjectNet object_;
  MixtureNet mixture_;
  std::vector<char> row_mask_;  // has_object of the last object forward
};

/// Cross entropy over the rows where `present` is nonzero (all rows when empty);
/// absent rows get zero gradient and a batch with no present row costs 0.
nn::LossResult loss_object(const Tensor& object_logits, std::span<const int> targets,
                           std::span<const char> present = {});

struct LocalLoss {
  double value = 0.0;
  double grasp_ce = 0.0;
  double curvature_l2 = 0.0;
  Tensor d_grasp_logits;
  Tensor d_curvature;  // empty when no curvature was predicted
};

/// CE(grasp) + alpha * masked squared error; the regression term is skipped
/// when curvature_pred is empty.
LocalLoss loss_local(const Tensor& grasp_logits, std::span<const int> grasp, const Tensor& curvature_pred,
                     const Tensor& curvature_target, std::span<const char> vertex_mask, const LossWeights& w);

struct ActionLoss {
  double value = 0.0;
  double action_ce = 0.0;
  Tensor d_action_logits;
};

/// CE(action) + beta * object_loss + kappa * local_loss.
ActionLoss loss_action_frame(const Tensor& action_logits, std::span<const int> action, double object_loss,
                             double local_loss, const LossWeights& w);

struct JointLoss {
  double value = 0.0;
  double grasp_ce = 0.0;
  double curvature_l2 = 0.0;
  double object_ce = 0.0;
  double action_ce = 0.0;
  GeneratorGrads grads;
};

/// The joint objective over a generator forward, with gradients scaled by the
/// loss weights and ready for FrameGenerator::backward.
JointLoss joint_loss(const GeneratorOutput& out, const FrameBatch& batch, const LossWeights& w);

}  // namespace handact::pipeline
