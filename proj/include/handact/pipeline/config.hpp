// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "handact/common/ini.hpp"
#include "handact/mesh/curvature.hpp"
#include "handact/temporal/temporal.hpp"

namespace handact::pipeline {

struct LossWeights {
  double alpha = 0.3;  // curvature term inside the local loss
  double beta = 0.2;   // object loss inside the joint loss
  double kappa = 0.5;  // local loss inside the joint loss
};

struct ModelConfig {
  int patch_size = 16;
  int conv1_channels = 8;
  int conv2_channels = 16;
  int backbone_features = 128;
  int local_hidden = 128;
  int grasp_embedding = 64;
  int curvature_hidden = 256;
  int relation_hidden = 128;
  int interaction = 64;
  int object_embedding = 256;
  int mixture_width = 256;
  double mixture_dropout = 0.1;
  int grasp_classes = 36;
  int object_classes = 5;
  int action_classes = 10;
  int vertices = 778;
  /// nullopt trains without the curvature head (ablation baseline).
  std::optional<mesh::CurvatureKind> curvature = mesh::CurvatureKind::Mean;
};

struct StageConfig {
  int epochs = 10;
  double lr = 0.0004;
  int batch = 64;
  int halving_period = 50;
};

struct AugmentConfig {
  bool enabled = false;
  /// Hue, saturation and exposure: factors within [1/(1+m), 1+m], hue up to m/5 of a turn.
  double color = 0.5;
  /// Translation up to this fraction of the patch; rotation up to this fraction of 90 degrees.
  double geometric = 0.1;
};

struct TrainConfig {
  std::uint64_t seed = 1;
  StageConfig local{30, 0.0004, 64, 50};
  StageConfig object{30, 0.0004, 64, 50};
  StageConfig joint{30, 0.0004, 64, 50};
  StageConfig temporal{30, 0.001, 16, 50};
  double momentum = 0.9;
  /// Joint gradient norm limit per step; 0 disables clipping.
  double clip_norm = 5.0;
  double detection_noise = 0.0;
  AugmentConfig augment;
};

struct PipelineConfig {
  ModelConfig model;
  LossWeights weights;
  TrainConfig train;
  temporal::TemporalConfig temporal{256, 2, 256, 256, 128, 10};
};

void validate(const PipelineConfig& config);

/// "none" maps to nullopt; otherwise parse_curvature_kind.
std::optional<mesh::CurvatureKind> parse_kind_option(const std::string& text);
std::string kind_option_name(const std::optional<mesh::CurvatureKind>& kind);

/// Reads every known key, keeping defaults for absent ones. Throws ConfigError
/// on unknown keys or malformed values.
PipelineConfig config_from_ini(const IniFile& ini);
IniFile config_to_ini(const PipelineConfig& config);

/// Keys read by config_from_ini.
const std::vector<std::string>& known_config_keys();

}  // namespace handact::pipeline
