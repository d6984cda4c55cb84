// SPDX-License-Identifier: Apache-2.0
#include "handact/taxonomy/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace handact::taxonomy {

namespace {

#include "default_taxonomy.inc"

using Kind = TaxonomyError::Kind;

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \r\n");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& s, std::size_t lineno) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw TaxonomyError(Kind::ParseError,
                        "line " + std::to_string(lineno) + ": bad integer '" + s + "'");
  }
}

bool skip_line(const std::string& line) {
  const auto b = line.find_first_not_of(" \t\r");
  return b == std::string::npos || line[b] == '#';
}

}  // namespace

std::string_view to_string(GraspCategory c) {
  switch (c) {
    case GraspCategory::Power:
      return "power";
    case GraspCategory::Precision:
      return "precision";
    case GraspCategory::Intermediate:
      return "intermediate";
    case GraspCategory::NonGrasp:
      return "non-grasp";
  }
  return "unknown";
}

std::optional<GraspCategory> parse_category(std::string_view name) {
  if (name == "power") return GraspCategory::Power;
  if (name == "precision") return GraspCategory::Precision;
  if (name == "intermediate") return GraspCategory::Intermediate;
  if (name == "non-grasp") return GraspCategory::NonGrasp;
  return std::nullopt;
}

Taxonomy::Taxonomy(std::vector<GraspType> types) : types_(std::move(types)) {
  std::set<int> ids;
  std::set<std::string> names;
  for (const GraspType& t : types_) {
    if (!ids.insert(t.id).second) {
      throw TaxonomyError(Kind::DuplicateId, "duplicate grasp id " + std::to_string(t.id));
    }
    if (!names.insert(t.name).second) {
      throw TaxonomyError(Kind::DuplicateName, "duplicate grasp name '" + t.name + "'");
    }
  }
  std::sort(types_.begin(), types_.end(),
            [](const GraspType& a, const GraspType& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < types_.size(); ++i) {
    if (types_[i].id != static_cast<int>(i)) {
      throw TaxonomyError(Kind::NonContiguousIds,
                          "grasp ids must be 0.." + std::to_string(types_.size() - 1));
    }
  }
  const bool has_non_grasp = std::any_of(types_.begin(), types_.end(), [](const GraspType& t) {
    return t.category == GraspCategory::NonGrasp;
  });
  if (!has_non_grasp) throw TaxonomyError(Kind::MissingNonGrasp, "taxonomy has no non-grasp entry");
}

const GraspType& Taxonomy::at(int id) const {
  if (!contains(id)) throw TaxonomyError(Kind::IndexOutOfRange, "no grasp id " + std::to_string(id));
  return types_[static_cast<std::size_t>(id)];
}

std::optional<int> Taxonomy::find(std::string_view name) const {
  for (const GraspType& t : types_) {
    if (t.name == name) return t.id;
  }
  return std::nullopt;
}

Taxonomy parse_taxonomy(std::istream& in) {
  std::vector<GraspType> types;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw TaxonomyError(Kind::ParseError, "line " + std::to_string(lineno) +
                                                ": expected id<TAB>name<TAB>category");
    }
    const std::string category = trim(fields[2]);
    const auto parsed = parse_category(category);
    if (!parsed) {
      throw TaxonomyError(Kind::BadCategory,
                          "line " + std::to_string(lineno) + ": unknown category '" + category + "'");
    }
    types.push_back({parse_int(trim(fields[0]), lineno), trim(fields[1]), *parsed});
  }
  return Taxonomy(std::move(types));
}

Taxonomy load_taxonomy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TaxonomyError(Kind::IoError, "cannot open " + path.string());
  return parse_taxonomy(in);
}

void write_taxonomy(std::ostream& out, const Taxonomy& taxonomy) {
  out << "# id\tname\tcategory\n";
  for (const GraspType& t : taxonomy.types()) {
    out << t.id << '\t' << t.name << '\t' << to_string(t.category) << '\n';
  }
}

std::string_view default_taxonomy_text() { return kDefaultTaxonomyText; }

const Taxonomy& default_taxonomy() {
  static const Taxonomy tax = [] {
    std::istringstream in{std::string(kDefaultTaxonomyText)};
    return parse_taxonomy(in);
  }();
  return tax;
}

void validate_annotation(const TransitionAnnotation& ann, int num_types) {
  if (ann.empty()) throw TaxonomyError(Kind::EmptyAnnotation, "annotation has no transitions");
  if (ann.front().frame != 0) {
    throw TaxonomyError(Kind::InvalidAnnotation, "first transition must be at frame 0");
  }
  for (std::size_t i = 0; i < ann.size(); ++i) {
    if (ann[i].grasp_id < 0 || (num_types > 0 && ann[i].grasp_id >= num_types)) {
      throw TaxonomyError(Kind::InvalidAnnotation,
                          "grasp id " + std::to_string(ann[i].grasp_id) + " is not in the taxonomy");
    }
    if (i == 0) continue;
    if (ann[i].frame <= ann[i - 1].frame) {
      throw TaxonomyError(Kind::InvalidAnnotation, "transition frames must strictly increase");
    }
    if (ann[i].grasp_id == ann[i - 1].grasp_id) {
      throw TaxonomyError(Kind::InvalidAnnotation,
                          "transition at frame " + std::to_string(ann[i].frame) +
                              " does not change the grasp type");
    }
  }
}

PerFrameLabels expand_transitions(const TransitionAnnotation& ann, int n_frames) {
  validate_annotation(ann);
  if (n_frames <= 0) throw TaxonomyError(Kind::IndexOutOfRange, "episode has no frames");
  if (ann.back().frame >= n_frames) {
    throw TaxonomyError(Kind::IndexOutOfRange, "transition at frame " +
                                                   std::to_string(ann.back().frame) +
                                                   " is past the last frame " +
                                                   std::to_string(n_frames - 1));
  }
  PerFrameLabels labels(static_cast<std::size_t>(n_frames));
  std::size_t k = 0;
  for (int t = 0; t < n_frames; ++t) {
    while (k + 1 < ann.size() && ann[k + 1].frame <= t) ++k;
    labels[static_cast<std::size_t>(t)] = ann[k].grasp_id;
  }
  return labels;
}

TransitionAnnotation to_transitions(const PerFrameLabels& labels) {
  TransitionAnnotation ann;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (t == 0 || labels[t] != labels[t - 1]) ann.push_back({static_cast<int>(t), labels[t]});
  }
  return ann;
}

TransitionAnnotation parse_annotation(std::istream& in) {
  TransitionAnnotation ann;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 2) {
      throw TaxonomyError(Kind::ParseError,
                          "line " + std::to_string(lineno) + ": expected frame_index<TAB>grasp_id");
    }
    ann.push_back({parse_int(trim(fields[0]), lineno), parse_int(trim(fields[1]), lineno)});
  }
  validate_annotation(ann);
  return ann;
}

void write_annotation(std::ostream& out, const TransitionAnnotation& ann) {
  for (const Transition& t : ann) out << t.frame << '\t' << t.grasp_id << '\n';
}

DistributionReport label_statistics(const std::vector<LabeledEpisode>& episodes,
                                    int num_grasp_types, int num_actions) {
  DistributionReport r;
  int max_grasp = -1;
  int max_action = -1;
  for (const LabeledEpisode& e : episodes) {
    max_action = std::max(max_action, e.action_id);
    for (int g : e.labels) max_grasp = std::max(max_grasp, g);
  }
  r.num_grasp_types = num_grasp_types > 0 ? num_grasp_types : max_grasp + 1;
  r.num_actions = num_actions > 0 ? num_actions : max_action + 1;
  const auto G = static_cast<std::size_t>(r.num_grasp_types);
  const auto A = static_cast<std::size_t>(r.num_actions);
  r.frames_per_grasp.assign(G, 0);
  r.grasp_action_frames.assign(G, std::vector<long>(A, 0));
  r.mean_frames_per_video.assign(G, 0.0);
  r.videos_with_grasp.assign(G, 0);

  std::vector<long> per_video(G);
  for (const LabeledEpisode& e : episodes) {
    if (e.action_id < 0 || e.action_id >= r.num_actions) {
      throw TaxonomyError(Kind::IndexOutOfRange, "action id " + std::to_string(e.action_id));
    }
    std::fill(per_video.begin(), per_video.end(), 0);
    for (int g : e.labels) {
      if (g < 0 || g >= r.num_grasp_types) {
        throw TaxonomyError(Kind::IndexOutOfRange, "grasp id " + std::to_string(g));
      }
      ++per_video[static_cast<std::size_t>(g)];
    }
    for (std::size_t g = 0; g < G; ++g) {
      if (per_video[g] == 0) continue;
      r.frames_per_grasp[g] += per_video[g];
      r.grasp_action_frames[g][static_cast<std::size_t>(e.action_id)] += per_video[g];
      r.mean_frames_per_video[g] += static_cast<double>(per_video[g]);
      ++r.videos_with_grasp[g];
    }
    r.total_frames += static_cast<long>(e.labels.size());
  }
  for (std::size_t g = 0; g < G; ++g) {
    if (r.videos_with_grasp[g] > 0) r.mean_frames_per_video[g] /= r.videos_with_grasp[g];
  }
  return r;
}

void write_histogram_csv(std::ostream& out, const DistributionReport& r, const Taxonomy* names) {
  out << "grasp_id,name,frames\n";
  for (int g = 0; g < r.num_grasp_types; ++g) {
    out << g << ',' << (names && names->contains(g) ? names->at(g).name : "") << ','
        << r.frames_per_grasp[static_cast<std::size_t>(g)] << '\n';
  }
}

void write_matrix_csv(std::ostream& out, const DistributionReport& r) {
  out << "grasp_id,action_id,frames\n";
  for (int g = 0; g < r.num_grasp_types; ++g) {
    for (int a = 0; a < r.num_actions; ++a) {
      out << g << ',' << a << ','
          << r.grasp_action_frames[static_cast<std::size_t>(g)][static_cast<std::size_t>(a)] << '\n';
    }
  }
}

void write_per_video_csv(std::ostream& out, const DistributionReport& r, const Taxonomy* names) {
  out << "grasp_id,name,videos,mean_frames_per_video\n";
  out << std::setprecision(10);
  for (int g = 0; g < r.num_grasp_types; ++g) {
    const auto i = static_cast<std::size_t>(g);
    out << g << ',' << (names && names->contains(g) ? names->at(g).name : "") << ','
        << r.videos_with_grasp[i] << ',' << r.mean_frames_per_video[i] << '\n';
  }
}

}  // namespace handact::taxonomy
