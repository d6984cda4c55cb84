// SPDX-License-Identifier: Apache-2.0
#include "handact/pipeline/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "handact/detect/detection.hpp"
#include "handact/mesh/io.hpp"
#include "handact/synth/corpus.hpp"
#include "handact/taxonomy/taxonomy.hpp"

namespace handact::pipeline {

namespace fs = std::filesystem;

std::vector<double> to_chw(const detect::Image& im) {
  std::vector<double> out(im.data.size());
  const std::size_t plane = static_cast<std::size_t>(im.width) * im.height;
  for (int y = 0; y < im.height; ++y) {
    for (int x = 0; x < im.width; ++x) {
      for (int c = 0; c < im.channels; ++c) out[c * plane + static_cast<std::size_t>(y) * im.width + x] = im.at(x, y, c);
    }
  }
  return out;
}

detect::Image from_chw(std::span<const double> chw, int size) {
  detect::Image im(size, size, 3);
  const std::size_t plane = static_cast<std::size_t>(size) * size;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      for (int c = 0; c < 3; ++c) im.at(x, y, c) = chw[c * plane + static_cast<std::size_t>(y) * size + x];
    }
  }
  return im;
}

std::vector<std::size_t> Dataset::frame_indices(bool train) const {
  std::vector<std::size_t> out;
  for (const EpisodeRef& e : episodes) {
    if (e.train == train) out.insert(out.end(), e.frames.begin(), e.frames.end());
  }
  return out;
}

std::vector<std::size_t> Dataset::episode_indices(bool train) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    if (episodes[i].train == train) out.push_back(i);
  }
  return out;
}

Dataset load_dataset(const fs::path& root, int patch_size, double detection_noise, std::uint64_t seed) {
  const synth::CorpusIndex index = synth::load_corpus_index(root);
  Dataset data;
  data.patch_size = patch_size;
  data.grasp_classes = taxonomy::default_taxonomy().size();
  data.object_classes = index.config.n_objects;
  data.action_classes = index.config.n_actions;

  const std::set<std::string> train(index.train.begin(), index.train.end());
  const std::set<std::string> test(index.test.begin(), index.test.end());
  std::map<std::string, int> episode_of;

  std::vector<mesh::Face> faces;
  mesh::VertexAdjacency adj;
  for (std::size_t i = 0; i < index.frames.size(); ++i) {
    const detect::FrameRecord& rec = index.frames[i];
    auto [it, fresh] = episode_of.emplace(rec.episode_id, static_cast<int>(data.episodes.size()));
    if (fresh) {
      EpisodeRef e;
      e.id = rec.episode_id;
      e.action = rec.action_id;
      e.train = train.count(rec.episode_id) != 0;
      if (!e.train && test.count(rec.episode_id) == 0) {
        throw DatasetError("episode " + rec.episode_id + " is in neither train.txt nor test.txt");
      }
      data.episodes.push_back(std::move(e));
    }
    EpisodeRef& ep = data.episodes[static_cast<std::size_t>(it->second)];
    if (ep.action != rec.action_id) throw DatasetError("episode " + rec.episode_id + " changes action label");

    const detect::Image image = detect::read_pnm(root / rec.image_path);
    if (image.channels != 3) throw DatasetError(rec.image_path + ": expected an RGB image");
    Rng jitter = Rng::derive(seed, i);
    const detect::DetectionResult det = detect::oracle_detect(rec, detection_noise, jitter);

    FrameSample s;
    s.hand = to_chw(detect::crop_and_resize(image, detect::resolve_primary_hand(det), patch_size));
    if (det.object) s.object = to_chw(detect::crop_and_resize(image, *det.object, patch_size));
    s.global = detect::global_feature(image, det);
    s.grasp = rec.grasp_id;
    s.object_id = rec.object_id;
    s.action = rec.action_id;
    s.episode = it->second;
    s.frame = rec.frame_idx;
    if (s.grasp < 0 || s.grasp >= data.grasp_classes || s.object_id < 0 || s.object_id >= data.object_classes ||
        s.action < 0 || s.action >= data.action_classes) {
      throw DatasetError(rec.episode_id + " frame " + std::to_string(rec.frame_idx) + ": label out of range");
    }

    const mesh::TriangleMesh m = mesh::load_mesh(root / rec.mesh_path);
    if (faces.empty() || m.faces != faces) {
      if (!faces.empty()) throw DatasetError(rec.mesh_path + ": mesh topology differs from the first frame");
      faces = m.faces;
      adj = mesh::build_adjacency(m);
      data.vertices = static_cast<int>(m.num_vertices());
    }
    const mesh::CurvatureField mean = mesh::mean_curvature(m, adj);
    const mesh::CurvatureField gauss = mesh::gaussian_curvature(m, adj);
    auto [kmax, kmin] = mesh::principal_curvatures(m, adj);
    const mesh::CurvatureField* fields[kCurvatureKinds] = {&mean, &gauss, &kmax, &kmin};
    for (std::size_t k = 0; k < kCurvatureKinds; ++k) {
      const auto kind = static_cast<std::size_t>(fields[k]->kind);
      s.curvature[kind] = fields[k]->values;
      if (data.vertex_mask[kind].empty()) {
        data.vertex_mask[kind].resize(fields[k]->boundary_mask.size());
        for (std::size_t v = 0; v < fields[k]->boundary_mask.size(); ++v) {
          data.vertex_mask[kind][v] = fields[k]->boundary_mask[v] ? 0 : 1;
        }
      }
      for (double v : s.curvature[kind]) {
        if (!std::isfinite(v)) throw DatasetError(rec.mesh_path + ": non-finite curvature");
      }
    }
    ep.frames.push_back(data.frames.size());
    data.frames.push_back(std::move(s));
  }
  for (EpisodeRef& e : data.episodes) {
    std::stable_sort(e.frames.begin(), e.frames.end(),
                     [&](std::size_t a, std::size_t b) { return data.frames[a].frame < data.frames[b].frame; });
  }
  if (data.frames.empty()) throw DatasetError(root.string() + ": corpus has no frames");
  return data;
}

FrameBatch make_batch(const Dataset& data, std::span<const std::size_t> indices,
                      const std::optional<mesh::CurvatureKind>& kind, const AugmentConfig* augment, Rng* rng) {
  const std::size_t b = indices.size();
  const std::size_t p = static_cast<std::size_t>(data.patch_size);
  const std::size_t pw = 3 * p * p;
  const std::size_t gw = data.frames.empty() ? 0 : data.frames[0].global.size();
  const bool aug = augment && augment->enabled && rng;

  FrameBatch batch;
  batch.hand = Tensor({b, 3, p, p});
  batch.object = Tensor({b, 3, p, p});
  batch.global = Tensor({b, gw});
  batch.has_object.assign(b, 0);
  if (kind) {
    const auto k = static_cast<std::size_t>(*kind);
    batch.curvature = Tensor({b, static_cast<std::size_t>(data.vertices)});
    batch.vertex_mask = data.vertex_mask[k];
  }
  for (std::size_t i = 0; i < b; ++i) {
    const FrameSample& s = data.frames.at(indices[i]);
    auto put = [&](const std::vector<double>& src, Tensor& dst) {
      if (aug) {
        const std::vector<double> a = to_chw(augment_patch(from_chw(src, data.patch_size), *augment, *rng));
        std::copy(a.begin(), a.end(), dst.data() + i * pw);
      } else {
        std::copy(src.begin(), src.end(), dst.data() + i * pw);
      }
    };
    put(s.hand, batch.hand);
    if (!s.object.empty()) {
      put(s.object, batch.object);
      batch.has_object[i] = 1;
    }
    std::copy(s.global.begin(), s.global.end(), batch.global.data() + i * gw);
    batch.grasp.push_back(s.grasp);
    batch.object_id.push_back(s.object_id);
    batch.action.push_back(s.action);
    if (kind) {
      const auto& v = s.curvature[static_cast<std::size_t>(*kind)];
      std::copy(v.begin(), v.end(), batch.curvature.data() + i * v.size());
    }
  }
  return batch;
}

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Log-uniform factor in [1/(1+m), 1+m].
double factor(double m, Rng& rng) { return std::exp(rng.uniform(-1.0, 1.0) * std::log1p(m)); }

double sample(const detect::Image& im, double x, double y, int c) {
  x = std::clamp(x, 0.0, static_cast<double>(im.width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(im.height - 1));
  const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, im.width - 1), y1 = std::min(y0 + 1, im.height - 1);
  const double fx = x - x0, fy = y - y0;
  return (1 - fy) * ((1 - fx) * im.at(x0, y0, c) + fx * im.at(x1, y0, c)) +
         fy * ((1 - fx) * im.at(x0, y1, c) + fx * im.at(x1, y1, c));
}

}  // namespace

detect::Image augment_patch(const detect::Image& patch, const AugmentConfig& cfg, Rng& rng) {
  if (!cfg.enabled || patch.channels != 3) return patch;
  detect::Image out = patch;
  if (cfg.color > 0) {
    const double exposure = factor(cfg.color, rng);
    const double saturation = factor(cfg.color, rng);
    const double hue = rng.uniform(-1.0, 1.0) * cfg.color * 0.2 * 2.0 * std::numbers::pi;
    // Rotation about the grey axis.
    const double c = std::cos(hue), s = std::sin(hue), k = (1 - c) / 3.0, q = s / std::sqrt(3.0);
    const double rot[3][3] = {{c + k, k - q, k + q}, {k + q, c + k, k - q}, {k - q, k + q, c + k}};
    for (std::size_t i = 0; i < out.data.size(); i += 3) {
      double* px = out.data.data() + i;
      double rgb[3];
      for (int r = 0; r < 3; ++r) rgb[r] = rot[r][0] * px[0] + rot[r][1] * px[1] + rot[r][2] * px[2];
      const double grey = 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
      for (int r = 0; r < 3; ++r) px[r] = clamp01(exposure * (grey + saturation * (rgb[r] - grey)));
    }
  }
  if (cfg.geometric > 0) {
    const double n = patch.width;
    const double tx = rng.uniform(-1.0, 1.0) * cfg.geometric * n;
    const double ty = rng.uniform(-1.0, 1.0) * cfg.geometric * n;
    const double angle = rng.uniform(-1.0, 1.0) * cfg.geometric * 0.5 * std::numbers::pi;
    const double ca = std::cos(angle), sa = std::sin(angle), centre = 0.5 * (n - 1);
    const detect::Image src = out;
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        // Inverse map: output pixel -> source position.
        const double dx = x - centre - tx, dy = y - centre - ty;
        const double sx = centre + ca * dx + sa * dy, sy = centre - sa * dx + ca * dy;
        for (int c = 0; c < 3; ++c) out.at(x, y, c) = clamp01(sample(src, sx, sy, c));
      }
    }
  }
  return out;
}

}  // namespace handact::pipeline
