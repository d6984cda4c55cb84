// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "handact/common/rng.hpp"
#include "handact/nn/gru.hpp"
#include "handact/nn/layers.hpp"
#include "handact/nn/loss.hpp"

namespace handact::temporal {

using nn::ParameterList;
using nn::Tensor;

struct TemporalConfig {
  int input = 256;
  int layers = 2;
  int hidden = 256;
  /// Widths of the two hidden aggregation layers; the third maps to C_a.
  int fc1 = 256;
  int fc2 = 128;
  int classes = 10;
};

/// Throws std::invalid_argument when any field is below 1.
void validate(const TemporalConfig& config);

/// Outputs for a batch of equal-length sequences.
struct TemporalOutput {
  std::vector<Tensor> frame_logits;  // [N][B, C_a]
  Tensor video_logits;               // [B, C_a]
};

/// One episode's prediction.
struct EpisodePrediction {
  Tensor frame_logits;  // [N, C_a]
  Tensor video_logits;  // [1, C_a]
  int action = -1;      // argmax of the video logits
};

/// Stacked bi-GRU with a per-step linear head and, on the time-averaged GRU
/// outputs, three fully connected layers giving the video logits.
class TemporalModel {
 public:
  TemporalModel() = default;
  TemporalModel(const TemporalConfig& config, Rng& rng);

  const TemporalConfig& config() const { return config_; }

  /// seq[t] is [B, input]. Throws EmptySequence.
  TemporalOutput forward(const std::vector<Tensor>& seq);
  /// Returns d loss / d seq[t].
  std::vector<Tensor> backward(const std::vector<Tensor>& d_frame_logits, const Tensor& d_video_logits);

  /// embeddings is [N, input] for one episode.
  EpisodePrediction predict(const Tensor& embeddings);

  ParameterList parameters();
  nn::BiGru& gru() { return gru_; }

 private:
  TemporalConfig config_;
  nn::BiGru gru_;
  nn::Linear step_head_;
  nn::Linear fc1_, fc2_, fc3_;
  nn::ReLU relu1_, relu2_;
  std::size_t steps_ = 0;
  std::size_t batch_ = 0;
};

struct TemporalLoss {
  double value = 0.0;
  double frame_term = 0.0;  // (1/N) sum_t CE_t
  double video_term = 0.0;
  std::vector<Tensor> d_frame_logits;
  Tensor d_video_logits;
};

/// (1/N) sum over frames of CE(frame logits, y) plus CE(video logits, y), each
/// CE averaged over the batch.
TemporalLoss loss_action_temporal(const TemporalOutput& out, std::span<const int> targets);

/// Argmax of the video logits.
int predict_video(TemporalModel& model, const Tensor& embeddings);

}  // namespace handact::temporal
