// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "handact/pipeline/config.hpp"
#include "handact/pipeline/dataset.hpp"
#include "handact/pipeline/generator.hpp"
#include "handact/temporal/temporal.hpp"

namespace handact::pipeline {

enum class Stage { Local, Object, Joint, Temporal, All };

std::optional<Stage> parse_stage(const std::string& name);
std::string to_string(Stage stage);

class TrainingError : public std::runtime_error {
 public:
  enum class Kind { NonFiniteLoss, MissingStage, Io };
  TrainingError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Copies the corpus class counts into the model and temporal settings.
PipelineConfig resolve_for_dataset(PipelineConfig config, const Dataset& data);

struct Model {
  FrameGenerator generator;
  temporal::TemporalModel temporal;
};

/// Fresh parameters from the config seed.
Model make_model(const PipelineConfig& config);

/// One metrics CSV row; absent values are written as empty fields.
struct MetricsRow {
  std::string stage;
  int epoch = 0;
  double lr = 0.0;
  double loss = 0.0;
  std::optional<double> grasp_ce, curvature_l2, object_ce, action_ce;
  std::optional<double> train_grasp_acc, train_object_acc, train_action_acc;
  std::optional<double> test_grasp_acc, test_object_acc, test_action_acc, test_video_acc, test_curvature_r2;
};

const std::string& metrics_header();
std::string format_metrics_row(const MetricsRow& row);

// Run directory layout:
//   config.ini       resolved configuration
//   generator.ckpt   frame-embedding generator parameters
//   temporal.ckpt    temporal model parameters
//   stages.txt       completed stages, one per line
//   metrics.csv      per-epoch rows of every stage run so far

std::set<std::string> completed_stages(const std::filesystem::path& run_dir);

/// Runs `stage` (or all four in order) and updates the run directory. `joint`
/// needs `local` and `object` done; `temporal` needs `joint`. Throws
/// TrainingError (MissingStage, NonFiniteLoss) and nn errors.
void train_stages(const Dataset& data, const PipelineConfig& config, Stage stage,
                  const std::filesystem::path& run_dir, std::ostream* progress = nullptr);

/// Reads config.ini and both checkpoints of a run directory. The temporal
/// checkpoint is optional; `has_temporal` reports whether it was found.
Model load_model(const std::filesystem::path& run_dir, PipelineConfig& config, bool& has_temporal);

// ---- evaluation

struct FrameOutputs {
  std::vector<int> grasp, object, action;  // argmax per frame
  Tensor embeddings;                       // [n, width]
  double curvature_sse = 0.0;
  double curvature_sum = 0.0;
  double curvature_sumsq = 0.0;
  std::size_t curvature_count = 0;
};

/// Eval-mode generator pass over the given frames.
FrameOutputs run_generator(FrameGenerator& generator, const Dataset& data, const std::vector<std::size_t>& frames,
                           const std::optional<mesh::CurvatureKind>& kind, std::size_t batch = 256);

/// Sum of squared residuals over the sum of squared deviations from the pooled
/// target mean; nullopt when nothing was regressed.
std::optional<double> pooled_r2(const FrameOutputs& out);

struct EvalReport {
  int episodes = 0;
  int frames = 0;
  double video_accuracy = 0.0;
  double frame_action_accuracy = 0.0;
  double grasp_accuracy = 0.0;
  double object_accuracy = 0.0;
  std::optional<double> curvature_mse;
  std::optional<double> curvature_r2;
  std::vector<std::vector<int>> action_confusion;  // [true][predicted], per video
  std::vector<std::vector<int>> grasp_confusion;   // [true][predicted], per frame
};

/// Evaluates on the test split (or the training split with train = true).
/// Without a temporal model the video accuracy is left at 0.
EvalReport evaluate(Model& model, const PipelineConfig& config, const Dataset& data, bool has_temporal,
                    bool train = false);

void write_confusion_csv(std::ostream& out, const std::vector<std::vector<int>>& confusion);

}  // namespace handact::pipeline
