// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace handact::detect {

enum class BoxClass { Hand, Object };
enum class Side { Left, Right };

/// Axis-aligned box in normalised image coordinates; (x, y) is the top-left corner.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  BoxClass cls = BoxClass::Hand;
  std::optional<Side> side;

  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }
  bool operator==(const BoundingBox&) const = default;
};

/// Throws InvalidBox unless 0 <= x, y; w, h > 0; x + w <= 1; y + h <= 1.
void validate_box(const BoundingBox& box);

struct FrameRecord {
  std::string episode_id;
  int frame_idx = 0;
  std::string image_path;  // relative to the manifest directory
  int action_id = 0;
  int grasp_id = 0;
  int object_id = 0;
  std::string mesh_path;
  std::optional<BoundingBox> hand_right;
  std::optional<BoundingBox> hand_left;
  std::optional<BoundingBox> object;

  bool operator==(const FrameRecord&) const = default;
};

// One record per line, whitespace separated:
//   episode_id frame_idx image_path action_id grasp_id object_id mesh_path hand_r hand_l obj
// Boxes are "x,y,w,h" or "-" when absent. Blank lines and '#' comments are skipped.

std::vector<FrameRecord> parse_manifest(const std::string& text);
std::vector<FrameRecord> read_manifest(const std::filesystem::path& path);
std::string format_manifest(const std::vector<FrameRecord>& frames);
void write_manifest(const std::filesystem::path& path, const std::vector<FrameRecord>& frames);

}  // namespace handact::detect
