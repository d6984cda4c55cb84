// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "handact/common/ini.hpp"
#include "handact/common/rng.hpp"
#include "handact/detect/image.hpp"
#include "handact/detect/manifest.hpp"
#include "handact/mesh/mesh.hpp"
#include "handact/synth/shapes.hpp"
#include "handact/taxonomy/taxonomy.hpp"

namespace handact::synth {

class GeneratorError : public std::runtime_error {
 public:
  enum class Kind { InvalidConfig, IoError, InvariantViolation };

  GeneratorError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct GeneratorConfig {
  int n_actions = 10;
  int n_grasp_types = 8;
  int n_objects = 5;
  int episodes_per_action = 20;
  int frames_per_episode = 16;
  int image_size = 32;
  double noise_level = 0.05;
  std::uint64_t seed = 7;
  double train_fraction = 0.8;
  /// Ripple amplitude that separates the two actions sharing a grasp script.
  double style_ripple = 0.04;
  /// Multiplies every deformation parameter; 0 yields the bare template.
  double deformation_gain = 1.0;
  /// Probability that an episode also shows the assistive left hand.
  double left_hand_rate = 0.3;
  /// Fixed decimals for mesh files; vertices are rounded to this before use.
  int mesh_decimals = 6;
};

/// Throws InvalidConfig for out-of-range fields.
void validate_config(const GeneratorConfig& config);
IniFile config_to_ini(const GeneratorConfig& config);
GeneratorConfig config_from_ini(const IniFile& ini);

/// Actions come in pairs that share a grasp script and object and differ only
/// in surface ripple (style), which shows up in curvature but not in the grasp
/// sequence.
struct ActionSpec {
  int action_id = 0;
  int pair = 0;
  int style = 0;
  int object_id = 0;
  std::vector<int> script;  // grasp ids in temporal order, at least two distinct
};

ActionSpec action_spec(int action_id, const GeneratorConfig& config);

/// Rest shape of a grasp type.
DeformParams grasp_shape(int grasp_id);

/// Noise-free deformation of frame t given the per-frame grasp labels.
DeformParams frame_deformation(const ActionSpec& action, const taxonomy::PerFrameLabels& labels,
                               int t, const GeneratorConfig& config);

/// One mesh per frame on the 778-vertex template. `noise` perturbs the
/// deformation parameters when non-null; vertices are rounded as written to disk.
std::vector<mesh::TriangleMesh> generate_mesh_sequence(int action_id,
                                                        const taxonomy::PerFrameLabels& labels,
                                                        const GeneratorConfig& config, Rng* noise);

struct Episode {
  std::string id;
  int action_id = 0;
  taxonomy::TransitionAnnotation annotation;
  taxonomy::PerFrameLabels labels;
  std::vector<detect::FrameRecord> frames;
  std::vector<mesh::TriangleMesh> meshes;
  std::vector<detect::Image> images;
};

/// Deterministic in (id, action, config, rng state). Paths in the frame
/// records are relative to the corpus root.
Episode generate_episode(const std::string& id, int action_id, const GeneratorConfig& config,
                         Rng& rng);

struct CorpusSummary {
  int episodes = 0;
  int frames = 0;
  std::vector<std::string> train;
  std::vector<std::string> test;
  std::uint64_t digest = 0;
};

// Corpus layout under the root directory:
//   manifest.txt, train.txt, test.txt, actions.tsv, taxonomy.tsv, generator.ini,
//   annotations/<episode>.tsv, images/<episode>_<frame>.ppm, meshes/<episode>_<frame>.off

/// Writes a corpus, creating `root` if needed. Also checks that the rest
/// shapes of distinct grasp types have clearly different mean curvature.
CorpusSummary generate_corpus(const GeneratorConfig& config, const std::filesystem::path& root);

/// Split by sorting each action's episodes on a seeded hash of their id.
void split_episodes(const std::vector<std::string>& ids, const std::vector<int>& actions,
                    double train_fraction, std::uint64_t seed, std::vector<std::string>& train,
                    std::vector<std::string>& test);

/// FNV-1a over relative paths and file contents, in path order.
std::uint64_t directory_digest(const std::filesystem::path& root);
std::string digest_hex(std::uint64_t digest);

/// Smallest L2 distance between mean-curvature fields of distinct grasp rest shapes.
double min_grasp_curvature_gap(int n_grasp_types);
inline constexpr double kMinGraspCurvatureGap = 0.5;

// ---- reading a corpus back

struct CorpusIndex {
  std::filesystem::path root;
  GeneratorConfig config;
  std::vector<detect::FrameRecord> frames;
  std::vector<std::string> train;
  std::vector<std::string> test;
};

CorpusIndex load_corpus_index(const std::filesystem::path& root);

// ---- brute-force decodability oracles

/// Leave-in nearest-centroid accuracy of `labels` from feature vectors.
double nearest_centroid_accuracy(const std::vector<std::vector<double>>& features,
                                 const std::vector<int>& labels);

/// Action whose noise-free meshes, regenerated with the episode's grasp
/// labels, lie closest to `meshes`; actions whose script does not cover the
/// labels are skipped.
int decode_action(const std::vector<mesh::TriangleMesh>& meshes,
                  const taxonomy::PerFrameLabels& labels, const GeneratorConfig& config);

struct OracleReport {
  double grasp_accuracy = 0.0;
  double object_accuracy = 0.0;
  double action_accuracy = 0.0;
};

/// Runs all three oracles over a generated corpus (patches are cropped from
/// the stored images with the stored boxes).
OracleReport run_oracles(const CorpusIndex& corpus, int patch_size = 16);

}  // namespace handact::synth
