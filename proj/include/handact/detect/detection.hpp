// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "handact/common/rng.hpp"
#include "handact/detect/image.hpp"
#include "handact/detect/manifest.hpp"

namespace handact::detect {

struct DetectionResult {
  std::vector<BoundingBox> hands;  // at most two
  std::optional<BoundingBox> object;
  std::string image_path;
};

/// Returns the manifest boxes, each coordinate perturbed by U(-noise, noise)
/// and clamped back into the unit square. Throws MissingAnnotation when the
/// record carries no box at all.
DetectionResult oracle_detect(const FrameRecord& frame, double noise, Rng& rng);

/// Rightmost hand by centre x; ties broken by the remaining coordinates so the
/// result does not depend on input order. Throws NoHandDetected.
BoundingBox resolve_primary_hand(const DetectionResult& d);

/// Bilinear resample of the box region to size x size. Sample i along an axis
/// sits at pixel coordinate box_origin + (i + 0.5) * box_extent / size - 0.5,
/// clamped to the image, so a full-image box at the native size copies the
/// image. Mirroring image and box horizontally mirrors the patch exactly.
Image crop_and_resize(const Image& image, const BoundingBox& box, int size);

inline constexpr int kGlobalGrid = 8;
inline constexpr int kBoxSlots = 3;
inline constexpr int kBoxSlotWidth = 5;  // cx, cy, w, h, present
inline constexpr int kGlobalFeatureWidth = kGlobalGrid * kGlobalGrid + kBoxSlots * kBoxSlotWidth;

/// 8x8 area-averaged grayscale thumbnail followed by (cx, cy, w, h, present)
/// for the primary hand, the other hand and the object. Absent slots are zero.
std::vector<double> global_feature(const Image& frame, const DetectionResult& d);

}  // namespace handact::detect
