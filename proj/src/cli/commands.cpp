// SPDX-License-Identifier: Apache-2.0
#include "handact/cli/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <map>
#include <iostream>
#include <sstream>

#include "handact/common/format.hpp"
#include "handact/mesh/curvature.hpp"
#include "handact/mesh/io.hpp"

#ifndef HANDACT_VERSION
#define HANDACT_VERSION "unknown"
#endif

namespace handact::cli {

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

pipeline::Dataset load_for(const fs::path& corpus, const pipeline::PipelineConfig& c) {
  return pipeline::load_dataset(corpus, c.model.patch_size, c.train.detection_noise, c.train.seed);
}

}  // namespace

std::string tool_version() { return HANDACT_VERSION; }

IniFile load_run_config(const std::optional<fs::path>& config, const std::optional<std::uint64_t>& seed) {
  IniFile ini;
  if (config) {
    if (!fs::exists(*config)) throw UsageError("config file " + config->string() + " does not exist");
    ini = IniFile::load(*config);
  }
  if (seed) {
    ini.set("seed", std::to_string(*seed));
    ini.set("generator.seed", std::to_string(*seed));
  }
  return ini;
}

void write_version(const fs::path& dir) { write_text(dir / "version.txt", "handact " + tool_version() + "\n"); }

void cmd_curvature(const fs::path& mesh_path, const std::string& kind_name, std::ostream& out) {
  const auto kind = mesh::parse_curvature_kind(kind_name);
  if (!kind) throw UsageError("unknown curvature kind '" + kind_name + "' (expected mean, gaussian, max or min)");
  const mesh::TriangleMesh m = mesh::load_mesh(mesh_path);
  const mesh::VertexAdjacency adj = mesh::build_adjacency(m);
  mesh::write_curvature_csv(out, mesh::compute_curvature(m, adj, *kind));
}

synth::CorpusSummary cmd_synth(const IniFile& config, const fs::path& out) {
  const synth::GeneratorConfig g = synth::config_from_ini(config);
  synth::CorpusSummary s = synth::generate_corpus(g, out);
  write_version(out);
  return s;
}

void cmd_train(const fs::path& corpus, pipeline::Stage stage, const IniFile& config, const fs::path& out,
               std::ostream* progress) {
  const pipeline::PipelineConfig c = pipeline::config_from_ini(config);
  const pipeline::Dataset data = load_for(corpus, c);
  pipeline::train_stages(data, c, stage, out, progress);
  write_version(out);
}

pipeline::EvalReport cmd_eval(const fs::path& corpus, const fs::path& checkpoint, const fs::path& out) {
  pipeline::PipelineConfig c;
  bool has_temporal = false;
  pipeline::Model m = pipeline::load_model(checkpoint, c, has_temporal);
  const pipeline::Dataset data = load_for(corpus, c);
  if (data.action_classes != c.model.action_classes || data.object_classes != c.model.object_classes) {
    throw std::runtime_error("corpus class counts differ from the checkpoint's");
  }
  const pipeline::EvalReport r = pipeline::evaluate(m, c, data, has_temporal);

  fs::create_directories(out);
  std::ostringstream csv;
  csv << "metric,value\n"
      << "episodes," << r.episodes << "\n"
      << "frames," << r.frames << "\n"
      << "video_accuracy," << (has_temporal ? format_double(r.video_accuracy) : "") << "\n"
      << "frame_action_accuracy," << format_double(r.frame_action_accuracy) << "\n"
      << "grasp_accuracy," << format_double(r.grasp_accuracy) << "\n"
      << "object_accuracy," << format_double(r.object_accuracy) << "\n"
      << "curvature_mse," << opt(r.curvature_mse) << "\n"
      << "curvature_r2," << opt(r.curvature_r2) << "\n";
  write_text(out / "eval.csv", csv.str());
  std::ostringstream a, g;
  pipeline::write_confusion_csv(a, r.action_confusion);
  pipeline::write_confusion_csv(g, r.grasp_confusion);
  write_text(out / "confusion_action.csv", a.str());
  write_text(out / "confusion_grasp.csv", g.str());
  write_text(out / "config.ini", pipeline::config_to_ini(c).format());
  write_version(out);
  return r;
}

const std::vector<std::string>& ablation_kinds() {
  static const std::vector<std::string> k = {"none", "mean", "gaussian", "max", "min"};
  return k;
}

std::string format_ablation_csv(const std::vector<AblationRow>& rows) {
  std::string s = "curvature,video_accuracy,frame_action_accuracy,grasp_accuracy,curvature_r2\n";
  for (const auto& r : rows) {
    s += r.kind + "," + format_double(r.video_accuracy) + "," + format_double(r.frame_action_accuracy) + "," +
         format_double(r.grasp_accuracy) + "," + opt(r.curvature_r2) + "\n";
  }
  return s;
}

std::vector<AblationRow> cmd_ablate(const fs::path& corpus, const IniFile& config, const fs::path& out,
                                    std::ostream* progress) {
  const pipeline::PipelineConfig base = pipeline::config_from_ini(config);
  // Patches and features do not depend on the curvature kind; load once.
  const pipeline::Dataset data = load_for(corpus, base);
  fs::create_directories(out);
  std::vector<AblationRow> rows;
  for (const std::string& kind : ablation_kinds()) {
    pipeline::PipelineConfig c = base;
    c.model.curvature = pipeline::parse_kind_option(kind);
    if (progress) *progress << "== variant " << kind << "\n";
    const fs::path dir = out / kind;
    pipeline::train_stages(data, c, pipeline::Stage::All, dir, progress);
    write_version(dir);
    pipeline::PipelineConfig resolved;
    bool has_temporal = false;
    pipeline::Model m = pipeline::load_model(dir, resolved, has_temporal);
    const pipeline::EvalReport r = pipeline::evaluate(m, resolved, data, has_temporal);
    rows.push_back({kind, r.video_accuracy, r.frame_action_accuracy, r.grasp_accuracy, r.curvature_r2});
  }
  write_text(out / "ablation.csv", format_ablation_csv(rows));
  write_text(out / "config.ini", pipeline::config_to_ini(base).format());
  write_version(out);
  return rows;
}

taxonomy::DistributionReport cmd_stats(const fs::path& corpus, const fs::path& out) {
  const synth::CorpusIndex index = synth::load_corpus_index(corpus);
  std::vector<std::string> order;
  std::map<std::string, std::pair<int, int>> info;  // id -> action, frames
  for (const auto& f : index.frames) {
    auto [it, fresh] = info.emplace(f.episode_id, std::make_pair(f.action_id, 0));
    if (fresh) order.push_back(f.episode_id);
    ++it->second.second;
  }
  std::vector<taxonomy::LabeledEpisode> episodes;
  for (const auto& id : order) {
    std::ifstream f(corpus / "annotations" / (id + ".tsv"));
    if (!f) throw std::runtime_error("missing annotation for episode " + id);
    const auto ann = taxonomy::parse_annotation(f);
    episodes.push_back({info[id].first, taxonomy::expand_transitions(ann, info[id].second)});
  }
  const auto& names = taxonomy::default_taxonomy();
  const taxonomy::DistributionReport r =
      taxonomy::label_statistics(episodes, index.config.n_grasp_types, index.config.n_actions);
  fs::create_directories(out);
  std::ostringstream h, m, v;
  taxonomy::write_histogram_csv(h, r, &names);
  taxonomy::write_matrix_csv(m, r);
  taxonomy::write_per_video_csv(v, r, &names);
  write_text(out / "histogram.csv", h.str());
  write_text(out / "grasp_action.csv", m.str());
  write_text(out / "per_video.csv", v.str());
  write_text(out / "config.ini", "corpus = " + fs::absolute(corpus).string() + "\n");
  write_version(out);
  return r;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hand action recognition toolkit: curvature fields, synthetic corpora, staged training"};
  app.set_version_flag("--version", "handact " + tool_version());
  app.require_subcommand(1);

  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  fs::path out_path, corpus, checkpoint, mesh_path;
  std::string kind = "mean", stage = "all";

  auto* curv = app.add_subcommand("curvature", "Per-vertex curvature of a mesh as CSV");
  curv->add_option("mesh", mesh_path, "OFF or OBJ mesh")->required()->check(CLI::ExistingFile);
  curv->add_option("--kind", kind, "mean, gaussian, max or min")
      ->check(CLI::IsMember({"mean", "gaussian", "max", "min"}));
  curv->add_option("--out", out_path, "CSV path (stdout when absent)");

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus");
  auto* train = app.add_subcommand("train", "Staged training");
  auto* eval = app.add_subcommand("eval", "Evaluate a trained run on the test split");
  auto* ablate = app.add_subcommand("ablate", "Curvature-kind ablation table");
  auto* stats = app.add_subcommand("stats", "Grasp-type distribution statistics");

  for (auto* sc : {synth_cmd, train, ablate}) {
    sc->add_option("--config", config, "key = value config file")->check(CLI::ExistingFile);
    sc->add_option("--seed", seed, "overrides the seeds in the config");
  }
  for (auto* sc : {synth_cmd, train, eval, ablate, stats}) {
    sc->add_option("--out", out_path, "output directory")->required();
  }
  for (auto* sc : {train, eval, ablate, stats}) {
    sc->add_option("--corpus", corpus, "corpus directory")->required()->check(CLI::ExistingDirectory);
  }
  train->add_option("--stage", stage, "local, object, joint, temporal or all")
      ->check(CLI::IsMember({"local", "object", "joint", "temporal", "all"}));
  eval->add_option("--checkpoint", checkpoint, "run directory written by train")
      ->required()
      ->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << "handact " << tool_version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return 2;
  }

  try {
    if (curv->parsed()) {
      if (out_path.empty()) {
        cmd_curvature(mesh_path, kind, out);
      } else {
        std::ofstream f(out_path);
        if (!f) throw std::runtime_error("cannot write " + out_path.string());
        cmd_curvature(mesh_path, kind, f);
      }
    } else if (synth_cmd->parsed()) {
      const auto s = cmd_synth(load_run_config(config, seed), out_path);
      out << "episodes " << s.episodes << " frames " << s.frames << " train " << s.train.size() << " test "
          << s.test.size() << " digest " << synth::digest_hex(s.digest) << "\n";
    } else if (train->parsed()) {
      cmd_train(corpus, *pipeline::parse_stage(stage), load_run_config(config, seed), out_path, &out);
    } else if (eval->parsed()) {
      const auto r = cmd_eval(corpus, checkpoint, out_path);
      out << "video_accuracy " << format_fixed(r.video_accuracy, 4) << " grasp_accuracy "
          << format_fixed(r.grasp_accuracy, 4) << " curvature_r2 " << (r.curvature_r2 ? format_fixed(*r.curvature_r2, 4) : "-")
          << "\n";
    } else if (ablate->parsed()) {
      const auto rows = cmd_ablate(corpus, load_run_config(config, seed), out_path, &out);
      out << format_ablation_csv(rows);
    } else if (stats->parsed()) {
      const auto r = cmd_stats(corpus, out_path);
      out << "frames " << r.total_frames << " grasp types " << r.num_grasp_types << " actions " << r.num_actions
          << "\n";
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace handact::cli
