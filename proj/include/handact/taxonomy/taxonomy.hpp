// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace handact::taxonomy {

class TaxonomyError : public std::runtime_error {
 public:
  enum class Kind {
    DuplicateId,
    DuplicateName,
    BadCategory,
    NonContiguousIds,
    MissingNonGrasp,
    ParseError,
    EmptyAnnotation,
    IndexOutOfRange,
    InvalidAnnotation,
    IoError,
  };

  TaxonomyError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

enum class GraspCategory { Power, Precision, Intermediate, NonGrasp };

std::string_view to_string(GraspCategory c);
std::optional<GraspCategory> parse_category(std::string_view name);

struct GraspType {
  int id = 0;
  std::string name;
  GraspCategory category = GraspCategory::Power;
};

/// Ordered grasp-type list with contiguous ids starting at 0, unique names and
/// at least one non-grasp (pre-grasp) entry.
class Taxonomy {
 public:
  explicit Taxonomy(std::vector<GraspType> types);

  int size() const { return static_cast<int>(types_.size()); }
  const GraspType& at(int id) const;
  std::optional<int> find(std::string_view name) const;
  const std::vector<GraspType>& types() const { return types_; }
  bool contains(int id) const { return id >= 0 && id < size(); }

 private:
  std::vector<GraspType> types_;
};

/// Line format: id<TAB>name<TAB>category. Blank lines and '#' comments skipped.
Taxonomy parse_taxonomy(std::istream& in);
Taxonomy load_taxonomy(const std::filesystem::path& path);
void write_taxonomy(std::ostream& out, const Taxonomy& taxonomy);

/// The 36-entry configuration shipped in data/taxonomy_36.tsv.
const Taxonomy& default_taxonomy();
std::string_view default_taxonomy_text();

struct Transition {
  int frame = 0;
  int grasp_id = 0;

  bool operator==(const Transition&) const = default;
};

/// Frames where the grasp type changes; first entry at frame 0.
using TransitionAnnotation = std::vector<Transition>;
using PerFrameLabels = std::vector<int>;

/// Throws InvalidAnnotation unless indices start at 0, strictly increase and
/// consecutive entries differ in grasp id. `num_types` > 0 also range-checks ids.
void validate_annotation(const TransitionAnnotation& ann, int num_types = 0);

/// Closed-left step function: frame t takes the grasp of the latest transition
/// at or before t.
PerFrameLabels expand_transitions(const TransitionAnnotation& ann, int n_frames);

/// Minimal annotation reproducing `labels`.
TransitionAnnotation to_transitions(const PerFrameLabels& labels);

/// Line format: frame_index<TAB>grasp_id.
TransitionAnnotation parse_annotation(std::istream& in);
void write_annotation(std::ostream& out, const TransitionAnnotation& ann);

struct LabeledEpisode {
  int action_id = 0;
  PerFrameLabels labels;
};

struct DistributionReport {
  int num_grasp_types = 0;
  int num_actions = 0;
  long total_frames = 0;
  std::vector<long> frames_per_grasp;                // [grasp]
  std::vector<std::vector<long>> grasp_action_frames;  // [grasp][action]
  /// Mean frame count of a grasp type over the videos where it occurs.
  std::vector<double> mean_frames_per_video;         // [grasp]
  std::vector<int> videos_with_grasp;                // [grasp]
};

/// `num_grasp_types` / `num_actions` of 0 are inferred from the largest ids.
DistributionReport label_statistics(const std::vector<LabeledEpisode>& episodes,
                                    int num_grasp_types = 0, int num_actions = 0);

void write_histogram_csv(std::ostream& out, const DistributionReport& r, const Taxonomy* names);
void write_matrix_csv(std::ostream& out, const DistributionReport& r);
void write_per_video_csv(std::ostream& out, const DistributionReport& r, const Taxonomy* names);

}  // namespace handact::taxonomy
