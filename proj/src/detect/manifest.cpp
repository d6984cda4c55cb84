// SPDX-License-Identifier: Apache-2.0
#include "handact/detect/manifest.hpp"

#include <fstream>
#include <sstream>

#include "handact/common/format.hpp"
#include "handact/detect/image.hpp"

namespace handact::detect {

namespace {

constexpr int kFields = 10;

[[noreturn]] void parse_error(int line, const std::string& msg) {
  throw DetectionError(DetectionError::Kind::ParseError,
                       "manifest line " + std::to_string(line) + ": " + msg);
}

std::optional<BoundingBox> parse_box(const std::string& tok, BoxClass cls, std::optional<Side> side,
                                     int line) {
  if (tok == "-") return std::nullopt;
  double v[4];
  std::size_t start = 0;
  for (int i = 0; i < 4; ++i) {
    const std::size_t comma = i < 3 ? tok.find(',', start) : tok.size();
    if (comma == std::string::npos) parse_error(line, "box '" + tok + "' needs four values");
    const auto parsed = parse_double(std::string_view(tok).substr(start, comma - start));
    if (!parsed) parse_error(line, "bad box value in '" + tok + "'");
    v[i] = *parsed;
    start = comma + 1;
  }
  BoundingBox box{v[0], v[1], v[2], v[3], cls, side};
  try {
    validate_box(box);
  } catch (const DetectionError& e) {
    parse_error(line, e.what());
  }
  return box;
}

int parse_id(const std::string& tok, const char* what, int line) {
  const auto v = parse_int(tok);
  if (!v || *v < 0) parse_error(line, std::string("bad ") + what + " '" + tok + "'");
  return static_cast<int>(*v);
}

std::string box_token(const std::optional<BoundingBox>& box) {
  if (!box) return "-";
  return format_double(box->x) + "," + format_double(box->y) + "," + format_double(box->w) + "," +
         format_double(box->h);
}

}  // namespace

void validate_box(const BoundingBox& b) {
  const bool ok = b.x >= 0.0 && b.y >= 0.0 && b.w > 0.0 && b.h > 0.0 && b.x + b.w <= 1.0 &&
                  b.y + b.h <= 1.0;
  if (!ok) {
    throw DetectionError(DetectionError::Kind::InvalidBox,
                         "box (" + format_double(b.x) + ", " + format_double(b.y) + ", " +
                             format_double(b.w) + ", " + format_double(b.h) +
                             ") outside the unit square");
  }
}

std::vector<FrameRecord> parse_manifest(const std::string& text) {
  std::vector<FrameRecord> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.size() != kFields) {
      parse_error(lineno, "expected " + std::to_string(kFields) + " fields, got " +
                              std::to_string(tok.size()));
    }
    FrameRecord r;
    r.episode_id = tok[0];
    r.frame_idx = parse_id(tok[1], "frame index", lineno);
    r.image_path = tok[2];
    r.action_id = parse_id(tok[3], "action id", lineno);
    r.grasp_id = parse_id(tok[4], "grasp id", lineno);
    r.object_id = parse_id(tok[5], "object id", lineno);
    r.mesh_path = tok[6];
    r.hand_right = parse_box(tok[7], BoxClass::Hand, Side::Right, lineno);
    r.hand_left = parse_box(tok[8], BoxClass::Hand, Side::Left, lineno);
    r.object = parse_box(tok[9], BoxClass::Object, std::nullopt, lineno);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<FrameRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DetectionError(DetectionError::Kind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

std::string format_manifest(const std::vector<FrameRecord>& frames) {
  std::string out =
      "# episode_id frame_idx image_path action_id grasp_id object_id mesh_path hand_r hand_l obj\n";
  for (const FrameRecord& r : frames) {
    out += r.episode_id + ' ' + std::to_string(r.frame_idx) + ' ' + r.image_path + ' ' +
           std::to_string(r.action_id) + ' ' + std::to_string(r.grasp_id) + ' ' +
           std::to_string(r.object_id) + ' ' + r.mesh_path + ' ' + box_token(r.hand_right) + ' ' +
           box_token(r.hand_left) + ' ' + box_token(r.object) + '\n';
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<FrameRecord>& frames) {
  std::ofstream out(path);
  if (!out) throw DetectionError(DetectionError::Kind::IoError, "cannot write " + path.string());
  out << format_manifest(frames);
}

}  // namespace handact::detect
