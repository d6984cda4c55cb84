// SPDX-License-Identifier: Apache-2.0
#include "handact/synth/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "handact/common/format.hpp"
#include "handact/detect/detection.hpp"
#include "handact/mesh/curvature.hpp"
#include "handact/mesh/io.hpp"

namespace handact::synth {

using detect::BoundingBox;
using detect::BoxClass;
using detect::FrameRecord;
using detect::Image;
using mesh::TriangleMesh;
using taxonomy::PerFrameLabels;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kBlendFrames = 3;
constexpr int kLookup = 64;

[[noreturn]] void invalid(const std::string& msg) {
  throw GeneratorError(GeneratorError::Kind::InvalidConfig, msg);
}

const mesh::VertexAdjacency& template_adjacency() {
  static const mesh::VertexAdjacency adj = mesh::build_adjacency(hand_template().mesh);
  return adj;
}

std::vector<double> mean_curvature_values(const TriangleMesh& m) {
  return mesh::mean_curvature(m, template_adjacency()).values;
}

// Nearest template vertex for each cell of a (u, v) grid over the unrolled
// surface: u runs around the tube, v from the tip (0) to the wrist (1).
const std::vector<int>& unroll_lookup() {
  static const std::vector<int> table = [] {
    const HandTemplate& t = hand_template();
    const double top = *std::max_element(t.height.begin(), t.height.end());
    std::vector<int> out(kLookup * kLookup);
    for (int j = 0; j < kLookup; ++j) {
      const double h = (1.0 - (j + 0.5) / kLookup) * top;
      for (int i = 0; i < kLookup; ++i) {
        const double a = 2.0 * kPi * (i + 0.5) / kLookup;
        double best = HUGE_VAL;
        for (std::size_t v = 0; v < t.height.size(); ++v) {
          double da = std::remainder(a - t.angle[v], 2.0 * kPi);
          const double d = std::pow(kHandRadius * da, 2) + std::pow(h - t.height[v], 2);
          if (d < best) {
            best = d;
            out[j * kLookup + i] = static_cast<int>(v);
          }
        }
      }
    }
    return out;
  }();
  return table;
}

void round_vertices(TriangleMesh& m, int decimals) {
  if (decimals < 0) return;
  const double scale = std::pow(10.0, decimals);
  for (auto& v : m.vertices) {
    for (int c = 0; c < 3; ++c) v[c] = std::round(v[c] * scale) / scale;
  }
}

DeformParams scaled(DeformParams p, double gain) {
  p.bend *= gain;
  p.flatten *= gain;
  p.bulge *= gain;
  p.ripple *= gain;
  return p;
}

double quantize(double v) {
  return static_cast<double>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)) * (1.0 / 255);
}

struct Layout {
  BoundingBox hand;
  BoundingBox object;
  std::optional<BoundingBox> left;
  double phase = 0.0;
};

Layout sample_layout(Rng& rng, double left_rate) {
  Layout l;
  l.hand.cls = BoxClass::Hand;
  l.hand.side = detect::Side::Right;
  l.hand.w = 0.36 + 0.06 * rng.uniform();
  l.hand.h = 0.40 + 0.06 * rng.uniform();
  l.hand.x = 0.52 + 0.06 * rng.uniform();
  l.hand.y = 0.25 + 0.15 * rng.uniform();
  l.object.cls = BoxClass::Object;
  l.object.w = 0.28 + 0.04 * rng.uniform();
  l.object.h = l.object.w;
  l.object.x = 0.04 + 0.06 * rng.uniform();
  l.object.y = 0.08 + 0.10 * rng.uniform();
  if (rng.bernoulli(left_rate)) {
    BoundingBox b{0.02 + 0.04 * rng.uniform(), 0.70 + 0.05 * rng.uniform(), 0.22, 0.22,
                  BoxClass::Hand, detect::Side::Left};
    l.left = b;
  }
  l.phase = 2.0 * kPi * rng.uniform();
  return l;
}

BoundingBox drifted(BoundingBox b, double dx, double dy) {
  b.x = std::clamp(b.x + dx, 0.0, 1.0 - b.w);
  b.y = std::clamp(b.y + dy, 0.0, 1.0 - b.h);
  return b;
}

template <typename Fn>
void paint_box(Image& img, const BoundingBox& box, Fn&& shade) {
  const int n = img.width;
  for (int py = 0; py < img.height; ++py) {
    const double cy = (py + 0.5) / img.height;
    if (cy < box.y || cy >= box.y + box.h) continue;
    for (int px = 0; px < n; ++px) {
      const double cx = (px + 0.5) / n;
      if (cx < box.x || cx >= box.x + box.w) continue;
      shade(px, py, (cx - box.x) / box.w, (cy - box.y) / box.h);
    }
  }
}

Image render_frame(const GeneratorConfig& config, const FrameRecord& r,
                   const std::vector<double>& curvature, Rng& noise) {
  const int n = config.image_size;
  Image img(n, n, 3);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = 0.25 + 0.15 * (y + 0.5) / n;
    }
  }
  if (r.object) {
    const double hue = static_cast<double>(r.object_id) / config.n_objects;
    paint_box(img, *r.object, [&](int px, int py, double u, double v) {
      const double rad = 2.0 * std::hypot(u - 0.5, v - 0.5);
      if (rad > 1.0) return;
      const double rings = 0.75 + 0.25 * std::cos(2.0 * kPi * rad * (2 + r.object_id));
      for (int c = 0; c < 3; ++c) {
        img.at(px, py, c) = (0.5 + 0.4 * std::cos(2.0 * kPi * (hue + c / 3.0))) * rings;
      }
    });
  }
  if (r.hand_left) {
    paint_box(img, *r.hand_left, [&](int px, int py, double, double) {
      img.at(px, py, 0) = 0.70;
      img.at(px, py, 1) = 0.55;
      img.at(px, py, 2) = 0.45;
    });
  }
  if (r.hand_right) {
    const int g = r.grasp_id;
    const double theta = (g % 4) * kPi / 4.0;
    const double cycles = (g / 4) % 2 == 0 ? 3.0 : 1.5;
    const double offset = 0.5 * kPi * ((g / 8) % 4);
    const auto& lookup = unroll_lookup();
    paint_box(img, *r.hand_right, [&](int px, int py, double u, double v) {
      const double s = u * std::cos(theta) + v * std::sin(theta);
      const int li = std::min(kLookup - 1, static_cast<int>(u * kLookup));
      const int lj = std::min(kLookup - 1, static_cast<int>(v * kLookup));
      const double h = curvature[static_cast<std::size_t>(lookup[lj * kLookup + li])];
      img.at(px, py, 0) = 0.5 + 0.35 * std::sin(2.0 * kPi * cycles * s + offset);
      img.at(px, py, 1) = 0.5 + 0.3 * std::tanh(0.5 * (h - 1.0));
      img.at(px, py, 2) = 0.6;
    });
  }
  for (double& v : img.data) {
    if (config.noise_level > 0.0) v += config.noise_level * noise.normal();
    v = quantize(v);
  }
  return img;
}

std::string frame_stem(const std::string& id, int t) {
  std::string idx = std::to_string(t);
  if (idx.size() < 3) idx.insert(0, 3 - idx.size(), '0');
  return id + "_" + idx;
}

PerFrameLabels sample_labels(const ActionSpec& spec, int n_frames, Rng& rng) {
  const int k = std::min<int>(static_cast<int>(spec.script.size()), n_frames);
  std::vector<int> start(k, 0);
  for (int i = 1; i < k; ++i) {
    int b = static_cast<int>(std::lround(static_cast<double>(i) * n_frames / k));
    if (n_frames >= 3 * k) b += static_cast<int>(rng.below(3)) - 1;
    start[i] = std::clamp(b, start[i - 1] + 1, n_frames - (k - i));
  }
  PerFrameLabels labels(n_frames);
  for (int i = 0; i < k; ++i) {
    const int end = i + 1 < k ? start[i + 1] : n_frames;
    for (int t = start[i]; t < end; ++t) labels[t] = spec.script[i];
  }
  return labels;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GeneratorError(GeneratorError::Kind::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw GeneratorError(GeneratorError::Kind::IoError, "write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GeneratorError(GeneratorError::Kind::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const std::vector<std::string> kCorpusFiles = {"manifest.txt", "train.txt",    "test.txt",
                                               "actions.tsv",  "taxonomy.tsv", "generator.ini"};
const std::vector<std::string> kCorpusDirs = {"annotations", "images", "meshes"};

void prepare_root(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (fs::exists(root)) {
    if (!fs::is_directory(root)) {
      throw GeneratorError(GeneratorError::Kind::IoError, root.string() + " is not a directory");
    }
    const bool empty = fs::directory_iterator(root) == fs::directory_iterator();
    if (!empty && !fs::exists(root / "manifest.txt")) {
      throw GeneratorError(GeneratorError::Kind::IoError,
                           root.string() + " is neither empty nor a corpus; refusing to write");
    }
    for (const auto& f : kCorpusFiles) fs::remove(root / f);
    for (const auto& d : kCorpusDirs) fs::remove_all(root / d);
  }
  fs::create_directories(root);
  for (const auto& d : kCorpusDirs) fs::create_directories(root / d);
}

}  // namespace

void validate_config(const GeneratorConfig& c) {
  if (c.n_actions < 1) invalid("n_actions must be at least 1");
  if (c.n_grasp_types < 2 || c.n_grasp_types > taxonomy::default_taxonomy().size()) {
    invalid("n_grasp_types must be in 2.." + std::to_string(taxonomy::default_taxonomy().size()));
  }
  if (c.n_objects < 1) invalid("n_objects must be at least 1");
  if (c.episodes_per_action < 1) invalid("episodes_per_action must be at least 1");
  if (c.frames_per_episode < 2) invalid("frames_per_episode must be at least 2");
  if (c.image_size < 8) invalid("image_size must be at least 8");
  if (!(c.noise_level >= 0.0 && c.noise_level <= 1.0)) invalid("noise_level must be in [0, 1]");
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) invalid("train_fraction must be in (0, 1)");
  if (!(c.left_hand_rate >= 0.0 && c.left_hand_rate <= 1.0)) invalid("left_hand_rate must be in [0, 1]");
  if (c.mesh_decimals < -1 || c.mesh_decimals > 12) invalid("mesh_decimals must be in -1..12");
  if (!std::isfinite(c.style_ripple) || !std::isfinite(c.deformation_gain)) {
    invalid("style_ripple and deformation_gain must be finite");
  }
}

IniFile config_to_ini(const GeneratorConfig& c) {
  IniFile ini;
  ini.set("generator.n_actions", std::to_string(c.n_actions));
  ini.set("generator.n_grasp_types", std::to_string(c.n_grasp_types));
  ini.set("generator.n_objects", std::to_string(c.n_objects));
  ini.set("generator.episodes_per_action", std::to_string(c.episodes_per_action));
  ini.set("generator.frames_per_episode", std::to_string(c.frames_per_episode));
  ini.set("generator.image_size", std::to_string(c.image_size));
  ini.set("generator.noise_level", format_double(c.noise_level));
  ini.set("generator.seed", std::to_string(c.seed));
  ini.set("generator.train_fraction", format_double(c.train_fraction));
  ini.set("generator.style_ripple", format_double(c.style_ripple));
  ini.set("generator.deformation_gain", format_double(c.deformation_gain));
  ini.set("generator.left_hand_rate", format_double(c.left_hand_rate));
  ini.set("generator.mesh_decimals", std::to_string(c.mesh_decimals));
  return ini;
}

GeneratorConfig config_from_ini(const IniFile& ini) {
  GeneratorConfig c;
  c.n_actions = ini.get_int("generator.n_actions", c.n_actions);
  c.n_grasp_types = ini.get_int("generator.n_grasp_types", c.n_grasp_types);
  c.n_objects = ini.get_int("generator.n_objects", c.n_objects);
  c.episodes_per_action = ini.get_int("generator.episodes_per_action", c.episodes_per_action);
  c.frames_per_episode = ini.get_int("generator.frames_per_episode", c.frames_per_episode);
  c.image_size = ini.get_int("generator.image_size", c.image_size);
  c.noise_level = ini.get_double("generator.noise_level", c.noise_level);
  if (const auto s = ini.get("generator.seed")) {
    const auto v = parse_int(*s);
    if (!v || *v < 0) throw ConfigError("generator.seed: '" + *s + "' is not a non-negative integer");
    c.seed = static_cast<std::uint64_t>(*v);
  }
  c.train_fraction = ini.get_double("generator.train_fraction", c.train_fraction);
  c.style_ripple = ini.get_double("generator.style_ripple", c.style_ripple);
  c.deformation_gain = ini.get_double("generator.deformation_gain", c.deformation_gain);
  c.left_hand_rate = ini.get_double("generator.left_hand_rate", c.left_hand_rate);
  c.mesh_decimals = ini.get_int("generator.mesh_decimals", c.mesh_decimals);
  return c;
}

ActionSpec action_spec(int action_id, const GeneratorConfig& c) {
  if (action_id < 0 || action_id >= c.n_actions) {
    invalid("action id " + std::to_string(action_id) + " out of range");
  }
  ActionSpec s;
  s.action_id = action_id;
  s.pair = action_id / 2;
  s.style = action_id % 2;
  s.object_id = s.pair % c.n_objects;
  const int others = c.n_grasp_types - 1;
  if (others == 1) {
    s.script = {0, 1};
  } else {
    s.script = {0, 1 + (2 * s.pair) % others, 1 + (2 * s.pair + 1) % others};
  }
  return s;
}

DeformParams grasp_shape(int g) {
  DeformParams p;
  if (g == 0) {
    p.flatten = 0.35;  // flattened palm
    return p;
  }
  p.bend = 0.08 + 0.42 * ((5 * g) % 8) / 7.0;
  p.flatten = 0.2 * ((3 * g) % 5) / 4.0;
  p.bulge = 0.12 * ((7 * g) % 4) / 3.0;
  p.bulge_cycles = 1 + g % 3;
  return p;
}

DeformParams frame_deformation(const ActionSpec& action, const PerFrameLabels& labels, int t,
                               const GeneratorConfig& c) {
  // Blend from the previous grasp shape over the first frames of a segment.
  int start = t;
  while (start > 0 && labels[start - 1] == labels[t]) --start;
  DeformParams p = grasp_shape(labels[t]);
  if (start > 0 && t - start < kBlendFrames - 1) {
    const double w = static_cast<double>(t - start + 1) / kBlendFrames;
    p = lerp(grasp_shape(labels[start - 1]), p, w);
  }
  const double phase = labels.size() > 1 ? static_cast<double>(t) / (labels.size() - 1) : 0.0;
  p.bend *= 0.9 + 0.2 * phase;
  p.ripple = action.style == 1 ? c.style_ripple : 0.0;
  return scaled(p, c.deformation_gain);
}

std::vector<TriangleMesh> generate_mesh_sequence(int action_id, const PerFrameLabels& labels,
                                                 const GeneratorConfig& c, Rng* noise) {
  const ActionSpec spec = action_spec(action_id, c);
  std::vector<TriangleMesh> out;
  out.reserve(labels.size());
  for (int t = 0; t < static_cast<int>(labels.size()); ++t) {
    DeformParams p = frame_deformation(spec, labels, t, c);
    if (noise && c.noise_level > 0.0) {
      const double s = c.noise_level * c.deformation_gain;
      p.bend += s * 0.2 * noise->normal();
      p.flatten += s * 0.1 * noise->normal();
      p.bulge += s * 0.05 * noise->normal();
      p.ripple += s * 0.05 * noise->normal();
    }
    TriangleMesh m = deform_hand(p);
    round_vertices(m, c.mesh_decimals);
    out.push_back(std::move(m));
  }
  return out;
}

Episode generate_episode(const std::string& id, int action_id, const GeneratorConfig& c, Rng& rng) {
  const ActionSpec spec = action_spec(action_id, c);
  Episode ep;
  ep.id = id;
  ep.action_id = action_id;
  ep.labels = sample_labels(spec, c.frames_per_episode, rng);
  ep.annotation = taxonomy::to_transitions(ep.labels);
  const Layout layout = sample_layout(rng, c.left_hand_rate);
  Rng mesh_noise(rng.next());
  Rng pixel_noise(rng.next());
  ep.meshes = generate_mesh_sequence(action_id, ep.labels, c, &mesh_noise);

  const int n = c.frames_per_episode;
  for (int t = 0; t < n; ++t) {
    const double angle = layout.phase + 2.0 * kPi * t / n;
    FrameRecord r;
    r.episode_id = id;
    r.frame_idx = t;
    r.image_path = "images/" + frame_stem(id, t) + ".ppm";
    r.mesh_path = "meshes/" + frame_stem(id, t) + ".off";
    r.action_id = action_id;
    r.grasp_id = ep.labels[t];
    r.object_id = spec.object_id;
    r.hand_right = drifted(layout.hand, 0.02 * std::sin(angle), 0.02 * std::cos(angle));
    r.object = drifted(layout.object, 0.01 * std::cos(angle), 0.01 * std::sin(angle));
    r.hand_left = layout.left;
    ep.images.push_back(render_frame(c, r, mean_curvature_values(ep.meshes[t]), pixel_noise));
    ep.frames.push_back(std::move(r));
  }
  return ep;
}

void split_episodes(const std::vector<std::string>& ids, const std::vector<int>& actions,
                    double train_fraction, std::uint64_t seed, std::vector<std::string>& train,
                    std::vector<std::string>& test) {
  std::map<int, std::vector<std::pair<std::uint64_t, std::string>>> by_action;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::uint64_t h = Rng::mix(seed ^ fnv1a(0xcbf29ce484222325ULL, ids[i]));
    by_action[actions[i]].emplace_back(h, ids[i]);
  }
  train.clear();
  test.clear();
  for (auto& [action, eps] : by_action) {
    std::sort(eps.begin(), eps.end());
    const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * eps.size()));
    for (std::size_t i = 0; i < eps.size(); ++i) (i < n_train ? train : test).push_back(eps[i].second);
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
}

double min_grasp_curvature_gap(int n_grasp_types) {
  std::vector<std::vector<double>> fields;
  for (int g = 0; g < n_grasp_types; ++g) fields.push_back(mean_curvature_values(deform_hand(grasp_shape(g))));
  double best = HUGE_VAL;
  for (int a = 0; a < n_grasp_types; ++a) {
    for (int b = a + 1; b < n_grasp_types; ++b) {
      double s = 0.0;
      for (std::size_t v = 0; v < fields[a].size(); ++v) s += std::pow(fields[a][v] - fields[b][v], 2);
      best = std::min(best, std::sqrt(s));
    }
  }
  return best;
}

CorpusSummary generate_corpus(const GeneratorConfig& c, const std::filesystem::path& root) {
  validate_config(c);
  const double gap = min_grasp_curvature_gap(c.n_grasp_types);
  if (c.deformation_gain > 0.0 && gap * c.deformation_gain < kMinGraspCurvatureGap) {
    throw GeneratorError(GeneratorError::Kind::InvariantViolation,
                         "grasp rest shapes too similar in mean curvature (gap " + format_double(gap) + ")");
  }
  prepare_root(root);

  CorpusSummary summary;
  std::vector<FrameRecord> manifest;
  std::vector<std::string> ids;
  std::vector<int> actions;
  std::string action_table = "action_id\tpair\tstyle\tobject_id\tscript\n";
  for (int a = 0; a < c.n_actions; ++a) {
    const ActionSpec spec = action_spec(a, c);
    std::string script;
    for (int g : spec.script) script += (script.empty() ? "" : ",") + std::to_string(g);
    action_table += std::to_string(a) + '\t' + std::to_string(spec.pair) + '\t' +
                    std::to_string(spec.style) + '\t' + std::to_string(spec.object_id) + '\t' +
                    script + '\n';
  }
  for (int a = 0; a < c.n_actions; ++a) {
    for (int e = 0; e < c.episodes_per_action; ++e) {
      const int index = a * c.episodes_per_action + e;
      std::string id = std::to_string(index);
      id = "ep" + std::string(id.size() < 4 ? 4 - id.size() : 0, '0') + id;
      Rng rng = Rng::derive(c.seed, static_cast<std::uint64_t>(index));
      const Episode ep = generate_episode(id, a, c, rng);
      for (std::size_t t = 0; t < ep.frames.size(); ++t) {
        detect::write_pnm(root / ep.frames[t].image_path, ep.images[t]);
        mesh::save_off(root / ep.frames[t].mesh_path, ep.meshes[t], c.mesh_decimals);
        manifest.push_back(ep.frames[t]);
      }
      std::ostringstream ann;
      taxonomy::write_annotation(ann, ep.annotation);
      write_text(root / "annotations" / (id + ".tsv"), ann.str());
      ids.push_back(id);
      actions.push_back(a);
    }
  }
  split_episodes(ids, actions, c.train_fraction, c.seed, summary.train, summary.test);
  detect::write_manifest(root / "manifest.txt", manifest);
  write_text(root / "train.txt", join_lines(summary.train));
  write_text(root / "test.txt", join_lines(summary.test));
  write_text(root / "actions.tsv", action_table);
  write_text(root / "taxonomy.tsv", std::string(taxonomy::default_taxonomy_text()));
  write_text(root / "generator.ini", config_to_ini(c).format());

  summary.episodes = static_cast<int>(ids.size());
  summary.frames = static_cast<int>(manifest.size());
  summary.digest = directory_digest(root);
  return summary;
}

std::uint64_t directory_digest(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files.push_back(fs::relative(entry.path(), root).generic_string());
  }
  std::sort(files.begin(), files.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& f : files) {
    h = fnv1a(h, f);
    h = fnv1a(h, std::string_view("\0", 1));
    h = fnv1a(h, read_text(root / f));
  }
  return h;
}

std::string digest_hex(std::uint64_t digest) {
  static const char* kHex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, digest >>= 4) out[i] = kHex[digest & 0xf];
  return out;
}

CorpusIndex load_corpus_index(const std::filesystem::path& root) {
  CorpusIndex idx;
  idx.root = root;
  if (!std::filesystem::exists(root / "manifest.txt")) {
    throw GeneratorError(GeneratorError::Kind::IoError, root.string() + " has no manifest.txt");
  }
  idx.config = config_from_ini(IniFile::load(root / "generator.ini"));
  idx.frames = detect::read_manifest(root / "manifest.txt");
  idx.train = read_lines(root / "train.txt");
  idx.test = read_lines(root / "test.txt");
  return idx;
}

double nearest_centroid_accuracy(const std::vector<std::vector<double>>& features,
                                 const std::vector<int>& labels) {
  if (features.empty()) return 0.0;
  std::map<int, std::pair<std::vector<double>, int>> centroids;
  for (std::size_t i = 0; i < features.size(); ++i) {
    auto& [sum, count] = centroids[labels[i]];
    if (sum.empty()) sum.assign(features[i].size(), 0.0);
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += features[i][k];
    ++count;
  }
  for (auto& [label, c] : centroids) {
    for (double& v : c.first) v /= c.second;
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    int best_label = -1;
    double best = HUGE_VAL;
    for (const auto& [label, c] : centroids) {
      double d = 0.0;
      for (std::size_t k = 0; k < c.first.size(); ++k) d += std::pow(features[i][k] - c.first[k], 2);
      if (d < best) {
        best = d;
        best_label = label;
      }
    }
    correct += best_label == labels[i];
  }
  return static_cast<double>(correct) / features.size();
}

int decode_action(const std::vector<TriangleMesh>& meshes, const PerFrameLabels& labels,
                  const GeneratorConfig& c) {
  const std::set<int> used(labels.begin(), labels.end());
  int best_action = -1;
  double best = HUGE_VAL;
  for (int a = 0; a < c.n_actions; ++a) {
    const ActionSpec spec = action_spec(a, c);
    const std::set<int> allowed(spec.script.begin(), spec.script.end());
    if (!std::includes(allowed.begin(), allowed.end(), used.begin(), used.end())) continue;
    const auto clean = generate_mesh_sequence(a, labels, c, nullptr);
    double d = 0.0;
    for (std::size_t t = 0; t < meshes.size(); ++t) {
      for (std::size_t v = 0; v < meshes[t].vertices.size(); ++v) {
        d += (meshes[t].vertices[v] - clean[t].vertices[v]).squaredNorm();
      }
    }
    if (d < best) {
      best = d;
      best_action = a;
    }
  }
  return best_action;
}

OracleReport run_oracles(const CorpusIndex& corpus, int patch_size) {
  std::vector<std::vector<double>> hand_features;
  std::vector<std::vector<double>> object_features;
  std::vector<int> grasp_labels;
  std::vector<int> object_labels;
  std::map<std::string, std::vector<const FrameRecord*>> episodes;
  Rng unused(0);
  for (const FrameRecord& r : corpus.frames) {
    const Image img = detect::read_pnm(corpus.root / r.image_path);
    const detect::DetectionResult d = detect::oracle_detect(r, 0.0, unused);
    hand_features.push_back(detect::crop_and_resize(img, detect::resolve_primary_hand(d), patch_size).data);
    grasp_labels.push_back(r.grasp_id);
    if (d.object) {
      object_features.push_back(detect::crop_and_resize(img, *d.object, patch_size).data);
      object_labels.push_back(r.object_id);
    }
    episodes[r.episode_id].push_back(&r);
  }
  OracleReport report;
  report.grasp_accuracy = nearest_centroid_accuracy(hand_features, grasp_labels);
  report.object_accuracy = nearest_centroid_accuracy(object_features, object_labels);

  int correct = 0;
  for (const auto& [id, frames] : episodes) {
    std::vector<TriangleMesh> meshes;
    PerFrameLabels labels;
    for (const FrameRecord* r : frames) {
      meshes.push_back(mesh::load_mesh(corpus.root / r->mesh_path));
      labels.push_back(r->grasp_id);
    }
    correct += decode_action(meshes, labels, corpus.config) == frames.front()->action_id;
  }
  report.action_accuracy = episodes.empty() ? 0.0 : static_cast<double>(correct) / episodes.size();
  return report;
}

}  // namespace handact::synth
