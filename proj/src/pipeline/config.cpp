// SPDX-License-Identifier: Apache-2.0
#include "handact/pipeline/config.hpp"

#include <functional>
#include <vector>

#include "handact/common/format.hpp"

namespace handact::pipeline {

namespace {

// One entry per config key; read and write share the table so the two never drift.
struct Field {
  std::string key;
  std::function<void(const IniFile&, PipelineConfig&)> read;
  std::function<std::string(const PipelineConfig&)> write;
};

template <typename Get>
Field make_int(const std::string& key, Get get) {
  return {key, [key, get](const IniFile& ini, PipelineConfig& c) { get(c) = ini.get_int(key, get(c)); },
          [get](const PipelineConfig& c) {
            PipelineConfig copy = c;
            return std::to_string(get(copy));
          }};
}

template <typename Get>
Field make_double(const std::string& key, Get get) {
  return {key, [key, get](const IniFile& ini, PipelineConfig& c) { get(c) = ini.get_double(key, get(c)); },
          [get](const PipelineConfig& c) {
            PipelineConfig copy = c;
            return format_double(get(copy));
          }};
}

template <typename Get>
Field make_bool(const std::string& key, Get get) {
  return {key, [key, get](const IniFile& ini, PipelineConfig& c) { get(c) = ini.get_bool(key, get(c)); },
          [get](const PipelineConfig& c) {
            PipelineConfig copy = c;
            return std::string(get(copy) ? "true" : "false");
          }};
}

void add_stage(std::vector<Field>& f, const std::string& name, StageConfig TrainConfig::*stage) {
  f.push_back(make_int(name + ".epochs", [stage](PipelineConfig& c) -> int& { return (c.train.*stage).epochs; }));
  f.push_back(make_double(name + ".lr", [stage](PipelineConfig& c) -> double& { return (c.train.*stage).lr; }));
  f.push_back(make_int(name + ".batch", [stage](PipelineConfig& c) -> int& { return (c.train.*stage).batch; }));
  f.push_back(make_int(name + ".halving_period",
                       [stage](PipelineConfig& c) -> int& { return (c.train.*stage).halving_period; }));
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"seed",
                 [](const IniFile& ini, PipelineConfig& c) {
                   if (const auto s = ini.get("seed")) {
                     const auto v = parse_int(*s);
                     if (!v || *v < 0) throw ConfigError("seed: '" + *s + "' is not a non-negative integer");
                     c.train.seed = static_cast<std::uint64_t>(*v);
                   }
                 },
                 [](const PipelineConfig& c) { return std::to_string(c.train.seed); }});
    f.push_back({"model.curvature",
                 [](const IniFile& ini, PipelineConfig& c) {
                   if (const auto s = ini.get("model.curvature")) c.model.curvature = parse_kind_option(*s);
                 },
                 [](const PipelineConfig& c) { return kind_option_name(c.model.curvature); }});
    f.push_back(make_int("model.patch_size", [](PipelineConfig& c) -> int& { return c.model.patch_size; }));
    f.push_back(make_int("model.conv1_channels", [](PipelineConfig& c) -> int& { return c.model.conv1_channels; }));
    f.push_back(make_int("model.conv2_channels", [](PipelineConfig& c) -> int& { return c.model.conv2_channels; }));
    f.push_back(make_int("model.backbone_features", [](PipelineConfig& c) -> int& { return c.model.backbone_features; }));
    f.push_back(make_int("model.local_hidden", [](PipelineConfig& c) -> int& { return c.model.local_hidden; }));
    f.push_back(make_int("model.grasp_embedding", [](PipelineConfig& c) -> int& { return c.model.grasp_embedding; }));
    f.push_back(make_int("model.curvature_hidden", [](PipelineConfig& c) -> int& { return c.model.curvature_hidden; }));
    f.push_back(make_int("model.relation_hidden", [](PipelineConfig& c) -> int& { return c.model.relation_hidden; }));
    f.push_back(make_int("model.interaction", [](PipelineConfig& c) -> int& { return c.model.interaction; }));
    f.push_back(make_int("model.object_embedding", [](PipelineConfig& c) -> int& { return c.model.object_embedding; }));
    f.push_back(make_int("model.mixture_width", [](PipelineConfig& c) -> int& { return c.model.mixture_width; }));
    f.push_back(make_int("model.grasp_classes", [](PipelineConfig& c) -> int& { return c.model.grasp_classes; }));
    f.push_back(make_int("model.object_classes", [](PipelineConfig& c) -> int& { return c.model.object_classes; }));
    f.push_back(make_int("model.action_classes", [](PipelineConfig& c) -> int& { return c.model.action_classes; }));
    f.push_back(make_int("model.vertices", [](PipelineConfig& c) -> int& { return c.model.vertices; }));
    f.push_back(make_double("model.mixture_dropout", [](PipelineConfig& c) -> double& { return c.model.mixture_dropout; }));
    f.push_back(make_double("loss.alpha", [](PipelineConfig& c) -> double& { return c.weights.alpha; }));
    f.push_back(make_double("loss.beta", [](PipelineConfig& c) -> double& { return c.weights.beta; }));
    f.push_back(make_double("loss.kappa", [](PipelineConfig& c) -> double& { return c.weights.kappa; }));
    add_stage(f, "local", &TrainConfig::local);
    add_stage(f, "object", &TrainConfig::object);
    add_stage(f, "joint", &TrainConfig::joint);
    add_stage(f, "temporal", &TrainConfig::temporal);
    f.push_back(make_int("temporal.layers", [](PipelineConfig& c) -> int& { return c.temporal.layers; }));
    f.push_back(make_int("temporal.hidden", [](PipelineConfig& c) -> int& { return c.temporal.hidden; }));
    f.push_back(make_int("temporal.fc1", [](PipelineConfig& c) -> int& { return c.temporal.fc1; }));
    f.push_back(make_int("temporal.fc2", [](PipelineConfig& c) -> int& { return c.temporal.fc2; }));
    f.push_back(make_double("train.momentum", [](PipelineConfig& c) -> double& { return c.train.momentum; }));
    f.push_back(make_double("train.clip_norm", [](PipelineConfig& c) -> double& { return c.train.clip_norm; }));
    f.push_back(make_double("train.detection_noise", [](PipelineConfig& c) -> double& { return c.train.detection_noise; }));
    f.push_back(make_bool("augment.enabled", [](PipelineConfig& c) -> bool& { return c.train.augment.enabled; }));
    f.push_back(make_double("augment.color", [](PipelineConfig& c) -> double& { return c.train.augment.color; }));
    f.push_back(make_double("augment.geometric", [](PipelineConfig& c) -> double& { return c.train.augment.geometric; }));
    return f;
  }();
  return table;
}

}  // namespace

std::optional<mesh::CurvatureKind> parse_kind_option(const std::string& text) {
  if (text == "none") return std::nullopt;
  if (auto k = mesh::parse_curvature_kind(text)) return k;
  throw ConfigError("unknown curvature kind '" + text + "' (expected mean, gaussian, max, min or none)");
}

std::string kind_option_name(const std::optional<mesh::CurvatureKind>& kind) {
  return kind ? std::string(mesh::to_string(*kind)) : "none";
}

void validate(const PipelineConfig& c) {
  const auto& m = c.model;
  auto positive = [](int v, const std::string& what) {
    if (v < 1) throw ConfigError(what + " must be at least 1");
  };
  if (m.patch_size < 4 || m.patch_size % 4 != 0) throw ConfigError("model.patch_size must be a positive multiple of 4");
  positive(m.conv1_channels, "model.conv1_channels");
  positive(m.conv2_channels, "model.conv2_channels");
  positive(m.backbone_features, "model.backbone_features");
  positive(m.local_hidden, "model.local_hidden");
  positive(m.grasp_embedding, "model.grasp_embedding");
  positive(m.curvature_hidden, "model.curvature_hidden");
  positive(m.relation_hidden, "model.relation_hidden");
  positive(m.interaction, "model.interaction");
  positive(m.object_embedding, "model.object_embedding");
  positive(m.mixture_width, "model.mixture_width");
  positive(m.grasp_classes, "grasp classes");
  positive(m.object_classes, "object classes");
  positive(m.action_classes, "action classes");
  positive(m.vertices, "vertex count");
  if (!(m.mixture_dropout >= 0.0 && m.mixture_dropout < 1.0)) throw ConfigError("model.mixture_dropout must be in [0, 1)");
  if (!(c.weights.alpha > 0 && c.weights.beta > 0 && c.weights.kappa > 0)) {
    throw ConfigError("loss weights must be positive");
  }
  for (const auto* s : {&c.train.local, &c.train.object, &c.train.joint, &c.train.temporal}) {
    if (s->epochs < 0) throw ConfigError("stage epochs must be non-negative");
    if (!(s->lr > 0)) throw ConfigError("stage lr must be positive");
    positive(s->batch, "stage batch");
    positive(s->halving_period, "stage halving_period");
  }
  if (!(c.train.momentum >= 0 && c.train.momentum < 1)) throw ConfigError("train.momentum must be in [0, 1)");
  if (!(c.train.clip_norm >= 0)) throw ConfigError("train.clip_norm must be non-negative");
  if (!(c.train.detection_noise >= 0 && c.train.detection_noise < 0.5)) {
    throw ConfigError("train.detection_noise must be in [0, 0.5)");
  }
  if (!(c.train.augment.color >= 0 && c.train.augment.geometric >= 0 && c.train.augment.geometric <= 0.5)) {
    throw ConfigError("augment magnitudes out of range");
  }
  if (c.temporal.input != m.mixture_width) throw ConfigError("temporal input must equal the mixture width");
  if (c.temporal.classes != m.action_classes) throw ConfigError("temporal classes must equal the action count");
  try {
    temporal::validate(c.temporal);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

PipelineConfig config_from_ini(const IniFile& ini) {
  std::string list;
  for (const auto& k : ini.unknown_keys(known_config_keys())) {
    if (k.rfind("generator.", 0) == 0) continue;  // corpus settings share the file
    list += (list.empty() ? "" : ", ") + k;
  }
  if (!list.empty()) {
    throw ConfigError("unknown config keys: " + list);
  }
  PipelineConfig c;
  for (const Field& f : fields()) f.read(ini, c);
  c.temporal.input = c.model.mixture_width;
  c.temporal.classes = c.model.action_classes;
  return c;
}

IniFile config_to_ini(const PipelineConfig& c) {
  IniFile ini;
  for (const Field& f : fields()) ini.set(f.key, f.write(c));
  return ini;
}

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const Field& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

}  // namespace handact::pipeline
