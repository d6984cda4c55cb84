// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "handact/common/rng.hpp"
#include "handact/detect/image.hpp"
#include "handact/mesh/curvature.hpp"
#include "handact/pipeline/config.hpp"
#include "handact/pipeline/generator.hpp"

namespace handact::pipeline {

inline constexpr std::size_t kCurvatureKinds = 4;

/// One frame, ready for batching. Patches are CHW in [0, 1].
struct FrameSample {
  std::vector<double> hand;
  std::vector<double> object;  // empty when no object box
  std::vector<double> global;
  int grasp = 0;
  int object_id = 0;
  int action = 0;
  int episode = 0;  // index into Dataset::episodes
  int frame = 0;
  /// Indexed by CurvatureKind.
  std::array<std::vector<double>, kCurvatureKinds> curvature;
};

struct EpisodeRef {
  std::string id;
  int action = 0;
  bool train = false;
  std::vector<std::size_t> frames;  // indices into Dataset::frames, in time order
};

struct Dataset {
  int patch_size = 0;
  int grasp_classes = 0;
  int object_classes = 0;
  int action_classes = 0;
  int vertices = 0;
  std::vector<FrameSample> frames;
  std::vector<EpisodeRef> episodes;
  /// Per kind: nonzero for vertices that enter the regression (non-boundary).
  std::array<std::vector<char>, kCurvatureKinds> vertex_mask;

  std::vector<std::size_t> frame_indices(bool train) const;
  std::vector<std::size_t> episode_indices(bool train) const;
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a generated corpus: crops hand and object patches through the oracle
/// detector, builds the global feature and computes all four curvature fields
/// from each frame's mesh. Detection jitter is seeded per frame.
Dataset load_dataset(const std::filesystem::path& corpus, int patch_size, double detection_noise = 0.0,
                     std::uint64_t seed = 0);

/// Copies the given frames into a batch; `kind` selects the regression target
/// (nullopt leaves it empty). With `augment` set, patches pass through augment_patch.
FrameBatch make_batch(const Dataset& data, std::span<const std::size_t> indices,
                      const std::optional<mesh::CurvatureKind>& kind, const AugmentConfig* augment = nullptr,
                      Rng* rng = nullptr);

/// Random hue, saturation and exposure change followed by a small translation
/// and rotation (bilinear, edge-clamped). Output stays in [0, 1]. Disabled or
/// zero-magnitude settings return the patch unchanged.
detect::Image augment_patch(const detect::Image& patch, const AugmentConfig& config, Rng& rng);

/// CHW vector <-> HWC image helpers for patches.
std::vector<double> to_chw(const detect::Image& image);
detect::Image from_chw(std::span<const double> chw, int size);

}  // namespace handact::pipeline
