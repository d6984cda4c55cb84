// SPDX-License-Identifier: Apache-2.0
#include "handact/pipeline/generator.hpp"

#include <cmath>

#include "handact/detect/detection.hpp"

namespace handact::pipeline {

using nn::NnError;

namespace {

std::size_t sz(int v) { return static_cast<std::size_t>(v); }

void mask_rows(Tensor& t, std::span<const char> keep) {
  if (keep.empty() || t.empty()) return;
  const std::size_t w = t.cols();
  for (std::size_t b = 0; b < t.rows(); ++b) {
    if (!keep[b]) std::fill(t.data() + b * w, t.data() + (b + 1) * w, 0.0);
  }
}

void append(ParameterList& dst, const ParameterList& src) { dst.insert(dst.end(), src.begin(), src.end()); }

void scale(Tensor& t, double s) {
  for (double& v : t.values()) v *= s;
}

}  // namespace

FrameGenerator::FrameGenerator(const ModelConfig& c, std::uint64_t seed) : config_(c) {
  // Separate streams so that dropping the curvature head leaves every other
  // initial weight unchanged.
  Rng r_hand = Rng::derive(seed, 11), r_obj = Rng::derive(seed, 12), r_local = Rng::derive(seed, 13),
      r_rel = Rng::derive(seed, 14), r_onet = Rng::derive(seed, 15), r_mix = Rng::derive(seed, 16);
  const std::size_t p = sz(c.patch_size), f = sz(c.backbone_features);
  hand_backbone_ = Backbone("hand_backbone", p, sz(c.conv1_channels), sz(c.conv2_channels), f, r_hand);
  object_backbone_ = Backbone("object_backbone", p, sz(c.conv1_channels), sz(c.conv2_channels), f, r_obj);
  local_ = LocalNet(f, sz(c.local_hidden), sz(c.grasp_embedding), sz(c.grasp_classes), sz(c.curvature_hidden),
                    sz(c.vertices), c.curvature.has_value(), r_local);
  relation_ = RelationNet(f, f, sz(c.relation_hidden), sz(c.interaction), r_rel);
  object_ = ObjectNet(f, sz(c.object_embedding), sz(c.object_classes), r_onet);
  MixtureInputs in;
  in.grasp_embedding = sz(c.grasp_embedding);
  in.curvature = c.curvature ? sz(c.vertices) : 0;
  in.interaction = sz(c.interaction);
  in.object_embedding = sz(c.object_embedding);
  in.global = static_cast<std::size_t>(detect::kGlobalFeatureWidth);
  mixture_ = MixtureNet(in, sz(c.mixture_width), sz(c.action_classes), c.mixture_dropout, seed, r_mix);
}

LocalOutput FrameGenerator::forward_local(const Tensor& hand) {
  return local_.forward(hand_backbone_.forward(hand));
}

void FrameGenerator::backward_local(const Tensor& d_grasp_logits, const Tensor& d_curvature) {
  hand_backbone_.backward(local_.backward(d_grasp_logits, Tensor(), d_curvature));
}

ObjectOutput FrameGenerator::forward_object(const Tensor& patches, std::span<const char> has_object) {
  Tensor f = object_backbone_.forward(patches);
  row_mask_.assign(has_object.begin(), has_object.end());
  mask_rows(f, row_mask_);
  ObjectOutput out = object_.forward(f);
  mask_rows(out.embedding, row_mask_);
  return out;
}

void FrameGenerator::backward_object(const Tensor& d_object_logits) {
  Tensor df = object_.backward(d_object_logits, Tensor());
  mask_rows(df, row_mask_);
  object_backbone_.backward(df);
}

GeneratorOutput FrameGenerator::forward(const FrameBatch& batch, Mode mode) {
  const std::size_t b = batch.size();
  if (batch.hand.rows() != b || batch.object.rows() != b || batch.global.rows() != b || batch.has_object.size() != b) {
    throw NnError(NnError::Kind::ShapeMismatch, "frame batch: inconsistent batch sizes");
  }
  GeneratorOutput out;
  const Tensor fh = hand_backbone_.forward(batch.hand);
  out.local = local_.forward(fh);

  Tensor fo = object_backbone_.forward(batch.object);
  row_mask_ = batch.has_object;
  mask_rows(fo, row_mask_);
  out.object = object_.forward(fo);
  mask_rows(out.object.embedding, row_mask_);

  out.interaction = relation_.forward(fh, fo);
  const Tensor none;
  out.mixture = mixture_.forward({&out.local.embedding, has_curvature() ? &out.local.curvature : &none,
                                  &out.interaction, &out.object.embedding, &batch.global},
                                 mode);
  return out;
}

void FrameGenerator::backward(const GeneratorGrads& g) {
  std::vector<Tensor> parts = mixture_.backward(g.action_logits, Tensor());
  // parts: grasp embedding, curvature, interaction, object embedding, global
  Tensor d_curv = g.curvature;
  if (has_curvature()) {
    if (d_curv.empty()) {
      d_curv = std::move(parts[1]);
    } else {
      nn::add_inplace(d_curv, parts[1]);
    }
  }
  Tensor d_oe = std::move(parts[3]);
  mask_rows(d_oe, row_mask_);
  Tensor d_fo = object_.backward(g.object_logits, d_oe);
  auto [d_fh_rel, d_fo_rel] = relation_.backward(parts[2]);
  nn::add_inplace(d_fo, d_fo_rel);
  mask_rows(d_fo, row_mask_);
  object_backbone_.backward(d_fo);

  Tensor d_fh = local_.backward(g.grasp_logits, parts[0], d_curv);
  nn::add_inplace(d_fh, d_fh_rel);
  hand_backbone_.backward(d_fh);
}

ParameterList FrameGenerator::local_parameters() {
  ParameterList out = hand_backbone_.parameters();
  append(out, local_.parameters());
  return out;
}

ParameterList FrameGenerator::object_parameters() {
  ParameterList out = object_backbone_.parameters();
  append(out, object_.parameters());
  return out;
}

ParameterList FrameGenerator::parameters() {
  ParameterList out = local_parameters();
  append(out, object_parameters());
  append(out, relation_.parameters());
  append(out, mixture_.parameters());
  return out;
}

// ---------------------------------------------------------------- losses

nn::LossResult loss_object(const Tensor& logits, std::span<const int> targets, std::span<const char> present) {
  if (present.empty()) return nn::softmax_cross_entropy(logits, targets);
  if (present.size() != logits.rows() || targets.size() != logits.rows()) {
    throw NnError(NnError::Kind::ShapeMismatch, "object loss: mask, targets and logits disagree in batch size");
  }
  std::vector<std::size_t> rows;
  std::vector<int> kept;
  for (std::size_t b = 0; b < present.size(); ++b) {
    if (present[b]) {
      rows.push_back(b);
      kept.push_back(targets[b]);
    }
  }
  nn::LossResult out;
  out.grad = Tensor(logits.shape());
  if (rows.empty()) return out;
  const nn::LossResult sub = nn::softmax_cross_entropy(nn::gather_rows(logits, rows), kept);
  out.value = sub.value;
  const std::size_t c = logits.cols();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(sub.grad.data() + i * c, sub.grad.data() + (i + 1) * c, out.grad.data() + rows[i] * c);
  }
  return out;
}

LocalLoss loss_local(const Tensor& grasp_logits, std::span<const int> grasp, const Tensor& curvature_pred,
                     const Tensor& curvature_target, std::span<const char> vertex_mask, const LossWeights& w) {
  LocalLoss out;
  nn::LossResult ce = nn::softmax_cross_entropy(grasp_logits, grasp);
  out.grasp_ce = ce.value;
  out.d_grasp_logits = std::move(ce.grad);
  if (!curvature_pred.empty()) {
    nn::LossResult l2 = nn::l2_loss(curvature_pred, curvature_target, vertex_mask);
    out.curvature_l2 = l2.value;
    scale(l2.grad, w.alpha);
    out.d_curvature = std::move(l2.grad);
  }
  out.value = out.grasp_ce + w.alpha * out.curvature_l2;
  return out;
}

ActionLoss loss_action_frame(const Tensor& action_logits, std::span<const int> action, double object_loss,
                             double local_loss, const LossWeights& w) {
  ActionLoss out;
  nn::LossResult ce = nn::softmax_cross_entropy(action_logits, action);
  out.action_ce = ce.value;
  out.d_action_logits = std::move(ce.grad);
  out.value = out.action_ce + w.beta * object_loss + w.kappa * local_loss;
  return out;
}

JointLoss joint_loss(const GeneratorOutput& out, const FrameBatch& batch, const LossWeights& w) {
  JointLoss j;
  LocalLoss local = loss_local(out.local.grasp_logits, batch.grasp, out.local.curvature, batch.curvature,
                               batch.vertex_mask, w);
  nn::LossResult object = loss_object(out.object.logits, batch.object_id, batch.has_object);
  ActionLoss action = loss_action_frame(out.mixture.logits, batch.action, object.value, local.value, w);
  j.value = action.value;
  j.grasp_ce = local.grasp_ce;
  j.curvature_l2 = local.curvature_l2;
  j.object_ce = object.value;
  j.action_ce = action.action_ce;
  scale(local.d_grasp_logits, w.kappa);
  if (!local.d_curvature.empty()) scale(local.d_curvature, w.kappa);
  scale(object.grad, w.beta);
  j.grads.grasp_logits = std::move(local.d_grasp_logits);
  j.grads.curvature = std::move(local.d_curvature);
  j.grads.object_logits = std::move(object.grad);
  j.grads.action_logits = std::move(action.d_action_logits);
  return j;
}

}  // namespace handact::pipeline
