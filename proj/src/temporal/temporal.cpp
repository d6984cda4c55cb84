// SPDX-License-Identifier: Apache-2.0
#include "handact/temporal/temporal.hpp"

#include <stdexcept>
#include <string>

namespace handact::temporal {

using nn::NnError;

void validate(const TemporalConfig& c) {
  auto positive = [](int v, const char* what) {
    if (v < 1) throw std::invalid_argument(std::string("temporal.") + what + " must be at least 1");
  };
  positive(c.input, "input");
  positive(c.layers, "layers");
  positive(c.hidden, "hidden");
  positive(c.fc1, "fc1");
  positive(c.fc2, "fc2");
  positive(c.classes, "classes");
}

TemporalModel::TemporalModel(const TemporalConfig& c, Rng& rng) : config_(c) {
  validate(c);
  const auto h2 = static_cast<std::size_t>(2 * c.hidden);
  gru_ = nn::BiGru("temporal.gru", static_cast<std::size_t>(c.input), static_cast<std::size_t>(c.hidden),
                   static_cast<std::size_t>(c.layers), rng);
  step_head_ = nn::Linear("temporal.step_head", h2, static_cast<std::size_t>(c.classes), rng);
  fc1_ = nn::Linear("temporal.fc1", h2, static_cast<std::size_t>(c.fc1), rng);
  fc2_ = nn::Linear("temporal.fc2", static_cast<std::size_t>(c.fc1), static_cast<std::size_t>(c.fc2), rng);
  fc3_ = nn::Linear("temporal.fc3", static_cast<std::size_t>(c.fc2), static_cast<std::size_t>(c.classes), rng);
}

TemporalOutput TemporalModel::forward(const std::vector<Tensor>& seq) {
  if (seq.empty()) throw NnError(NnError::Kind::EmptySequence, "temporal model: empty sequence");
  const std::vector<Tensor> states = gru_.forward(seq);
  steps_ = states.size();
  batch_ = states[0].rows();
  const std::size_t width = states[0].cols();

  // One head call over all steps stacked as rows [t * B + b].
  Tensor stacked({steps_ * batch_, width});
  Tensor pooled({batch_, width});
  for (std::size_t t = 0; t < steps_; ++t) {
    std::copy(states[t].data(), states[t].data() + batch_ * width, stacked.data() + t * batch_ * width);
    for (std::size_t i = 0; i < batch_ * width; ++i) pooled[i] += states[t][i];
  }
  const double inv = 1.0 / static_cast<double>(steps_);
  for (double& v : pooled.values()) v *= inv;

  TemporalOutput out;
  const Tensor all = step_head_.forward(stacked);
  const std::size_t c = all.cols();
  for (std::size_t t = 0; t < steps_; ++t) {
    Tensor f({batch_, c});
    std::copy(all.data() + t * batch_ * c, all.data() + (t + 1) * batch_ * c, f.data());
    out.frame_logits.push_back(std::move(f));
  }
  out.video_logits = fc3_.forward(relu2_.forward(fc2_.forward(relu1_.forward(fc1_.forward(pooled)))));
  return out;
}

std::vector<Tensor> TemporalModel::backward(const std::vector<Tensor>& d_frame, const Tensor& d_video) {
  if (d_frame.size() != steps_) {
    throw NnError(NnError::Kind::ShapeMismatch, "temporal backward: step count differs from forward");
  }
  const std::size_t c = static_cast<std::size_t>(config_.classes);
  Tensor d_all({steps_ * batch_, c});
  for (std::size_t t = 0; t < steps_; ++t) {
    nn::require_shape(d_frame[t], {batch_, c}, "frame logit gradient");
    std::copy(d_frame[t].data(), d_frame[t].data() + batch_ * c, d_all.data() + t * batch_ * c);
  }
  const Tensor d_stacked = step_head_.backward(d_all);
  const Tensor d_pooled = fc1_.backward(relu1_.backward(fc2_.backward(relu2_.backward(fc3_.backward(d_video)))));

  const std::size_t width = d_pooled.cols();
  const double inv = 1.0 / static_cast<double>(steps_);
  std::vector<Tensor> d_states;
  d_states.reserve(steps_);
  for (std::size_t t = 0; t < steps_; ++t) {
    Tensor d({batch_, width});
    const double* s = d_stacked.data() + t * batch_ * width;
    for (std::size_t i = 0; i < batch_ * width; ++i) d[i] = s[i] + inv * d_pooled[i];
    d_states.push_back(std::move(d));
  }
  return gru_.backward(d_states);
}

EpisodePrediction TemporalModel::predict(const Tensor& embeddings) {
  if (embeddings.rank() != 2 || embeddings.rows() == 0) {
    throw NnError(NnError::Kind::EmptySequence, "predict: need an [N, D] embedding matrix with N >= 1");
  }
  std::vector<Tensor> seq;
  const std::size_t d = embeddings.cols();
  for (std::size_t t = 0; t < embeddings.rows(); ++t) {
    Tensor x({1, d});
    std::copy(embeddings.data() + t * d, embeddings.data() + (t + 1) * d, x.data());
    seq.push_back(std::move(x));
  }
  TemporalOutput out = forward(seq);
  EpisodePrediction p;
  const std::size_t c = out.video_logits.cols();
  p.frame_logits = Tensor({seq.size(), c});
  for (std::size_t t = 0; t < seq.size(); ++t) {
    std::copy(out.frame_logits[t].data(), out.frame_logits[t].data() + c, p.frame_logits.data() + t * c);
  }
  p.video_logits = std::move(out.video_logits);
  p.action = nn::argmax_rows(p.video_logits)[0];
  return p;
}

ParameterList TemporalModel::parameters() {
  ParameterList out = gru_.parameters();
  for (nn::Linear* l : {&step_head_, &fc1_, &fc2_, &fc3_}) {
    for (auto* p : l->parameters()) out.push_back(p);
  }
  return out;
}

TemporalLoss loss_action_temporal(const TemporalOutput& out, std::span<const int> targets) {
  TemporalLoss loss;
  const double inv = out.frame_logits.empty() ? 0.0 : 1.0 / static_cast<double>(out.frame_logits.size());
  for (const Tensor& f : out.frame_logits) {
    nn::LossResult r = nn::softmax_cross_entropy(f, targets);
    loss.frame_term += r.value;
    for (double& g : r.grad.values()) g *= inv;
    loss.d_frame_logits.push_back(std::move(r.grad));
  }
  loss.frame_term *= inv;
  nn::LossResult v = nn::softmax_cross_entropy(out.video_logits, targets);
  loss.video_term = v.value;
  loss.d_video_logits = std::move(v.grad);
  loss.value = loss.frame_term + loss.video_term;
  return loss;
}

int predict_video(TemporalModel& model, const Tensor& embeddings) { return model.predict(embeddings).action; }

}  // namespace handact::temporal
