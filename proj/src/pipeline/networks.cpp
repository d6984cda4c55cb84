// SPDX-License-Identifier: Apache-2.0
#include "handact/pipeline/networks.hpp"

#include <numeric>

namespace handact::pipeline {

using nn::NnError;

// ---------------------------------------------------------------- Dense

Dense::Dense(const std::string& name, std::size_t in, std::size_t out, bool relu, double dropout,
             std::uint64_t dropout_seed, Rng& rng)
    : linear_(name, in, out, rng), relu_(relu), dropout_(dropout, dropout_seed) {}

Tensor Dense::forward(const Tensor& x, Mode mode) {
  Tensor y = linear_.forward(x);
  if (relu_) y = act_.forward(y);
  return dropout_.forward(y, mode);
}

Tensor Dense::backward(const Tensor& dy) {
  Tensor g = dropout_.backward(dy);
  if (relu_) g = act_.backward(g);
  return linear_.backward(g);
}

// ---------------------------------------------------------------- Backbone

Backbone::Backbone(const std::string& name, std::size_t patch_size, std::size_t c1, std::size_t c2,
                   std::size_t features, Rng& rng)
    : patch_(patch_size),
      conv1_(name + ".conv1", 3, c1, 3, rng),
      conv2_(name + ".conv2", c1, c2, 3, rng),
      fc_(name + ".fc", c2 * (patch_size / 4) * (patch_size / 4), features, true, 0.0, 0, rng) {
  if (patch_size % 4 != 0 || patch_size == 0) {
    throw NnError(NnError::Kind::ShapeMismatch, "patch size must be a positive multiple of 4");
  }
}

Tensor Backbone::forward(const Tensor& patches) {
  if (patches.rank() != 4 || patches.dim(1) != 3 || patches.dim(2) != patch_ || patches.dim(3) != patch_) {
    throw NnError(NnError::Kind::ShapeMismatch,
                  "backbone expects [B, 3, " + std::to_string(patch_) + ", " + std::to_string(patch_) +
                      "], got " + nn::shape_string(patches.shape()));
  }
  Tensor h = pool1_.forward(relu1_.forward(conv1_.forward(patches)));
  h = pool2_.forward(relu2_.forward(conv2_.forward(h)));
  pooled_shape_ = h.shape();
  return fc_.forward(h.reshaped({h.dim(0), h.size() / h.dim(0)}), Mode::Train);
}

void Backbone::backward(const Tensor& d_features) {
  Tensor g = fc_.backward(d_features).reshaped(pooled_shape_);
  g = conv2_.backward(relu2_.backward(pool2_.backward(g)));
  conv1_.backward(relu1_.backward(pool1_.backward(g)));
}

ParameterList Backbone::parameters() {
  ParameterList out = conv1_.parameters();
  for (auto* p : conv2_.parameters()) out.push_back(p);
  for (auto* p : fc_.parameters()) out.push_back(p);
  return out;
}

// ---------------------------------------------------------------- LocalNet

LocalNet::LocalNet(std::size_t features, std::size_t hidden, std::size_t embedding,
                   std::size_t grasp_classes, std::size_t curvature_hidden, std::size_t vertices,
                   bool with_curvature, Rng& rng)
    : with_curvature_(with_curvature),
      features_(features),
      fc1_("local.fc1", features, hidden, true, 0.0, 0, rng),
      fc2_("local.fc2", hidden, embedding, true, 0.0, 0, rng),
      head_("local.grasp_head", embedding, grasp_classes, false, 0.0, 0, rng) {
  if (with_curvature) {
    curv1_ = Dense("local.curv1", features + embedding, curvature_hidden, true, 0.0, 0, rng);
    curv2_ = Dense("local.curv2", curvature_hidden, vertices, false, 0.0, 0, rng);
  }
}

LocalOutput LocalNet::forward(const Tensor& f) {
  LocalOutput out;
  out.embedding = fc2_.forward(fc1_.forward(f, Mode::Train), Mode::Train);
  out.grasp_logits = head_.forward(out.embedding, Mode::Train);
  if (with_curvature_) {
    out.curvature = curv2_.forward(curv1_.forward(nn::concat_cols({&f, &out.embedding}), Mode::Train),
                                   Mode::Train);
  }
  return out;
}

Tensor LocalNet::backward(const Tensor& d_logits, const Tensor& d_embedding, const Tensor& d_curvature) {
  Tensor de = head_.backward(d_logits);
  if (!d_embedding.empty()) nn::add_inplace(de, d_embedding);
  Tensor df;
  if (with_curvature_) {
    const Tensor d_in = curv1_.backward(curv2_.backward(d_curvature));
    auto parts = nn::split_cols(d_in, {features_, de.cols()});
    nn::add_inplace(de, parts[1]);
    df = std::move(parts[0]);
  }
  Tensor d_fc = fc1_.backward(fc2_.backward(de));
  if (!df.empty()) nn::add_inplace(d_fc, df);
  return d_fc;
}

ParameterList LocalNet::parameters() {
  ParameterList out;
  for (Dense* d : {&fc1_, &fc2_, &head_}) {
    for (auto* p : d->parameters()) out.push_back(p);
  }
  if (with_curvature_) {
    for (Dense* d : {&curv1_, &curv2_}) {
      for (auto* p : d->parameters()) out.push_back(p);
    }
  }
  return out;
}

// ---------------------------------------------------------------- RelationNet

RelationNet::RelationNet(std::size_t hand_features, std::size_t object_features, std::size_t hidden,
                         std::size_t embedding, Rng& rng)
    : hand_(hand_features),
      object_(object_features),
      fc1_("relation.fc1", hand_features + object_features, hidden, true, 0.0, 0, rng),
      fc2_("relation.fc2", hidden, embedding, true, 0.0, 0, rng) {}

Tensor RelationNet::forward(const Tensor& hand, const Tensor& object) {
  return fc2_.forward(fc1_.forward(nn::concat_cols({&hand, &object}), Mode::Train), Mode::Train);
}

std::pair<Tensor, Tensor> RelationNet::backward(const Tensor& d_embedding) {
  auto parts = nn::split_cols(fc1_.backward(fc2_.backward(d_embedding)), {hand_, object_});
  return {std::move(parts[0]), std::move(parts[1])};
}

ParameterList RelationNet::parameters() {
  ParameterList out = fc1_.parameters();
  for (auto* p : fc2_.parameters()) out.push_back(p);
  return out;
}

// ---------------------------------------------------------------- ObjectNet

ObjectNet::ObjectNet(std::size_t features, std::size_t embedding, std::size_t classes, Rng& rng)
    : embed_("object.embed", features, embedding, true, 0.0, 0, rng),
      head_("object.head", embedding, classes, false, 0.0, 0, rng) {}

ObjectOutput ObjectNet::forward(const Tensor& f) {
  ObjectOutput out;
  out.embedding = embed_.forward(f, Mode::Train);
  out.logits = head_.forward(out.embedding, Mode::Train);
  return out;
}

Tensor ObjectNet::backward(const Tensor& d_logits, const Tensor& d_embedding) {
  Tensor de = head_.backward(d_logits);
  if (!d_embedding.empty()) nn::add_inplace(de, d_embedding);
  return embed_.backward(de);
}

ParameterList ObjectNet::parameters() {
  ParameterList out = embed_.parameters();
  for (auto* p : head_.parameters()) out.push_back(p);
  return out;
}

// ---------------------------------------------------------------- MixtureNet

std::vector<std::size_t> MixtureInputs::widths() const {
  return {grasp_embedding, curvature, interaction, object_embedding, global};
}

std::size_t MixtureInputs::total() const {
  const auto w = widths();
  return std::accumulate(w.begin(), w.end(), std::size_t{0});
}

MixtureNet::MixtureNet(const MixtureInputs& inputs, std::size_t width, std::size_t action_classes,
                       double dropout, std::uint64_t seed, Rng& rng)
    : inputs_(inputs),
      fc1_("mixture.fc1", inputs.total(), width, true, dropout, Rng::mix(seed + 1), rng),
      fc2_("mixture.fc2", width, width, true, dropout, Rng::mix(seed + 2), rng),
      fc3_("mixture.fc3", width, width, true, dropout, Rng::mix(seed + 3), rng),
      head_("mixture.action_head", width, action_classes, false, 0.0, 0, rng) {}

MixtureOutput MixtureNet::forward(const std::vector<const Tensor*>& parts, Mode mode) {
  const auto widths = inputs_.widths();
  if (parts.size() != widths.size()) {
    throw NnError(NnError::Kind::ShapeMismatch, "mixture expects " + std::to_string(widths.size()) + " parts");
  }
  std::vector<const Tensor*> present;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::size_t got = parts[i]->empty() ? 0 : parts[i]->cols();
    if (got != widths[i]) {
      throw NnError(NnError::Kind::ShapeMismatch, "mixture input " + std::to_string(i) + " has width " +
                                                      std::to_string(got) + ", expected " +
                                                      std::to_string(widths[i]));
    }
    if (widths[i] > 0) present.push_back(parts[i]);
  }
  MixtureOutput out;
  const Tensor x = nn::concat_cols(present);
  out.embedding = fc3_.forward(fc2_.forward(fc1_.forward(x, mode), mode), mode);
  out.logits = head_.forward(out.embedding, mode);
  return out;
}

std::vector<Tensor> MixtureNet::backward(const Tensor& d_logits, const Tensor& d_embedding) {
  Tensor de = head_.backward(d_logits);
  if (!d_embedding.empty()) nn::add_inplace(de, d_embedding);
  const Tensor dx = fc1_.backward(fc2_.backward(fc3_.backward(de)));
  std::vector<std::size_t> present;
  for (std::size_t w : inputs_.widths()) {
    if (w > 0) present.push_back(w);
  }
  auto split = nn::split_cols(dx, present);
  std::vector<Tensor> out;
  std::size_t k = 0;
  for (std::size_t w : inputs_.widths()) out.push_back(w > 0 ? std::move(split[k++]) : Tensor());
  return out;
}

ParameterList MixtureNet::parameters() {
  ParameterList out;
  for (Dense* d : {&fc1_, &fc2_, &fc3_, &head_}) {
    for (auto* p : d->parameters()) out.push_back(p);
  }
  return out;
}

void MixtureNet::freeze_dropout(bool frozen) {
  for (Dense* d : {&fc1_, &fc2_, &fc3_}) d->dropout().freeze_mask(frozen);
}

}  // namespace handact::pipeline
