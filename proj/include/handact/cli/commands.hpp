// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "handact/pipeline/config.hpp"
#include "handact/pipeline/training.hpp"
#include "handact/synth/corpus.hpp"
#include "handact/taxonomy/taxonomy.hpp"

namespace handact::cli {

namespace fs = std::filesystem;

std::string tool_version();

/// Misuse that should end with exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Config file (optional) with --seed applied on top. The seed sets both
/// `seed` and `generator.seed`.
IniFile load_run_config(const std::optional<fs::path>& config, const std::optional<std::uint64_t>& seed);

/// Writes version.txt into a run directory.
void write_version(const fs::path& dir);

/// Per-vertex CSV of one curvature kind. Throws UsageError for an unknown kind.
void cmd_curvature(const fs::path& mesh, const std::string& kind, std::ostream& out);

synth::CorpusSummary cmd_synth(const IniFile& config, const fs::path& out);

void cmd_train(const fs::path& corpus, pipeline::Stage stage, const IniFile& config, const fs::path& out,
               std::ostream* progress);

/// Writes eval.csv and both confusion matrices to `out`; the checkpoint
/// directory is only read.
pipeline::EvalReport cmd_eval(const fs::path& corpus, const fs::path& checkpoint, const fs::path& out);

struct AblationRow {
  std::string kind;
  double video_accuracy = 0.0;
  double frame_action_accuracy = 0.0;
  double grasp_accuracy = 0.0;
  std::optional<double> curvature_r2;
};

/// Kinds in table order.
const std::vector<std::string>& ablation_kinds();

/// Trains one full pipeline per curvature kind (and without curvature) into
/// out/<kind>/ and writes out/ablation.csv.
std::vector<AblationRow> cmd_ablate(const fs::path& corpus, const IniFile& config, const fs::path& out,
                                    std::ostream* progress);
std::string format_ablation_csv(const std::vector<AblationRow>& rows);

/// Label distributions from the corpus annotations: histogram.csv,
/// grasp_action.csv and per_video.csv.
taxonomy::DistributionReport cmd_stats(const fs::path& corpus, const fs::path& out);

/// Full command line handling. Returns the process exit code: 0 success,
/// 1 runtime failure, 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace handact::cli
