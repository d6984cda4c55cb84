// SPDX-License-Identifier: Apache-2.0
#include "handact/pipeline/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>

#include "handact/common/format.hpp"
#include "handact/nn/checkpoint.hpp"
#include "handact/nn/optim.hpp"

namespace handact::pipeline {

namespace fs = std::filesystem;

std::optional<Stage> parse_stage(const std::string& name) {
  if (name == "local") return Stage::Local;
  if (name == "object") return Stage::Object;
  if (name == "joint") return Stage::Joint;
  if (name == "temporal") return Stage::Temporal;
  if (name == "all") return Stage::All;
  return std::nullopt;
}

std::string to_string(Stage s) {
  switch (s) {
    case Stage::Local: return "local";
    case Stage::Object: return "object";
    case Stage::Joint: return "joint";
    case Stage::Temporal: return "temporal";
    case Stage::All: return "all";
  }
  return "?";
}

PipelineConfig resolve_for_dataset(PipelineConfig c, const Dataset& data) {
  c.model.patch_size = data.patch_size;
  c.model.grasp_classes = data.grasp_classes;
  c.model.object_classes = data.object_classes;
  c.model.action_classes = data.action_classes;
  c.model.vertices = data.vertices;
  c.temporal.input = c.model.mixture_width;
  c.temporal.classes = c.model.action_classes;
  return c;
}

Model make_model(const PipelineConfig& c) {
  validate(c);
  Model m;
  m.generator = FrameGenerator(c.model, c.train.seed);
  Rng rng = Rng::derive(c.train.seed, 21);
  m.temporal = temporal::TemporalModel(c.temporal, rng);
  return m;
}

// ---------------------------------------------------------------- metrics

const std::string& metrics_header() {
  static const std::string h =
      "stage,epoch,lr,loss,grasp_ce,curvature_l2,object_ce,action_ce,train_grasp_acc,train_object_acc,"
      "train_action_acc,test_grasp_acc,test_object_acc,test_action_acc,test_video_acc,test_curvature_r2";
  return h;
}

std::string format_metrics_row(const MetricsRow& r) {
  std::string out = r.stage + "," + std::to_string(r.epoch) + "," + format_double(r.lr) + "," + format_double(r.loss);
  for (const auto* v : {&r.grasp_ce, &r.curvature_l2, &r.object_ce, &r.action_ce, &r.train_grasp_acc,
                        &r.train_object_acc, &r.train_action_acc, &r.test_grasp_acc, &r.test_object_acc,
                        &r.test_action_acc, &r.test_video_acc, &r.test_curvature_r2}) {
    out += ",";
    if (*v) out += format_double(**v);
  }
  return out;
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw TrainingError(TrainingError::Kind::Io, "cannot write " + path.string());
  f << text;
  if (!f) throw TrainingError(TrainingError::Kind::Io, "write failed: " + path.string());
}

void append_metrics(const fs::path& run_dir, const MetricsRow& row) {
  const fs::path path = run_dir / "metrics.csv";
  const bool fresh = !fs::exists(path);
  std::ofstream f(path, std::ios::binary | std::ios::app);
  if (!f) throw TrainingError(TrainingError::Kind::Io, "cannot write " + path.string());
  if (fresh) f << metrics_header() << "\n";
  f << format_metrics_row(row) << "\n";
}

void save_stages(const fs::path& run_dir, const std::set<std::string>& stages) {
  std::string text;
  for (const char* s : {"local", "object", "joint", "temporal"}) {
    if (stages.count(s)) text += std::string(s) + "\n";
  }
  write_file(run_dir / "stages.txt", text);
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

void require_finite(double loss, const std::string& where) {
  if (!std::isfinite(loss)) {
    throw TrainingError(TrainingError::Kind::NonFiniteLoss, where + ": loss became " + format_double(loss) +
                                                                "; lower the learning rate or enable clipping");
  }
}

double accuracy(const std::vector<int>& pred, std::span<const int> truth) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == truth[i];
  return pred.empty() ? 0.0 : static_cast<double>(hit) / pred.size();
}

struct Running {
  double loss = 0, grasp = 0, curv = 0, object = 0, action = 0;
  std::size_t n = 0, grasp_hit = 0, object_hit = 0, object_n = 0, action_hit = 0;

  void add_hits(const std::vector<int>& pred, std::span<const int> truth, std::size_t& hit) {
    for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == truth[i];
  }
  double mean(double v) const { return n ? v / n : 0.0; }
};

void step(const nn::ParameterList& params, nn::SgdMomentum& opt, const StageConfig& s, double clip, int epoch) {
  if (clip > 0) nn::clip_grad_norm(params, clip);
  opt.step(nn::SgdSchedule{s.lr, s.halving_period}, epoch);
}

std::vector<int> labels_of(const Dataset& data, const std::vector<std::size_t>& idx, int FrameSample::*field) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(data.frames[i].*field);
  return out;
}

// Episodes grouped by length so each group forms one batch shape.
std::map<std::size_t, std::vector<std::size_t>> by_length(const Dataset& data, const std::vector<std::size_t>& eps) {
  std::map<std::size_t, std::vector<std::size_t>> out;
  for (std::size_t e : eps) out[data.episodes[e].frames.size()].push_back(e);
  return out;
}

// Sequence input for a batch of episodes from per-frame embeddings (rows indexed by frame).
std::vector<Tensor> sequence(const Dataset& data, const Tensor& emb, const std::vector<std::size_t>& eps) {
  const std::size_t n = data.episodes[eps[0]].frames.size();
  const std::size_t w = emb.cols();
  std::vector<Tensor> seq;
  for (std::size_t t = 0; t < n; ++t) {
    Tensor x({eps.size(), w});
    for (std::size_t b = 0; b < eps.size(); ++b) {
      const std::size_t f = data.episodes[eps[b]].frames[t];
      std::copy(emb.data() + f * w, emb.data() + (f + 1) * w, x.data() + b * w);
    }
    seq.push_back(std::move(x));
  }
  return seq;
}

// Embedding matrix with one row per dataset frame.
Tensor all_embeddings(FrameGenerator& g, const Dataset& data) {
  std::vector<std::size_t> all(data.frames.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return run_generator(g, data, all, std::nullopt).embeddings;
}

std::vector<int> predict_videos(temporal::TemporalModel& tm, const Dataset& data, const Tensor& emb,
                                const std::vector<std::size_t>& eps, std::vector<int>* truth) {
  std::vector<int> pred;
  for (const auto& [len, group] : by_length(data, eps)) {
    (void)len;
    for (std::size_t start = 0; start < group.size(); start += 64) {
      const std::vector<std::size_t> chunk(group.begin() + start, group.begin() + std::min(group.size(), start + 64));
      const auto out = tm.forward(sequence(data, emb, chunk));
      const auto am = nn::argmax_rows(out.video_logits);
      pred.insert(pred.end(), am.begin(), am.end());
      if (truth) {
        for (std::size_t e : chunk) truth->push_back(data.episodes[e].action);
      }
    }
  }
  return pred;
}

void log_row(std::ostream* progress, const MetricsRow& r) {
  if (!progress) return;
  *progress << r.stage << " epoch " << r.epoch << " loss " << format_fixed(r.loss, 4);
  auto show = [&](const char* name, const std::optional<double>& v) {
    if (v) *progress << " " << name << " " << format_fixed(*v, 3);
  };
  show("train_grasp", r.train_grasp_acc);
  show("train_obj", r.train_object_acc);
  show("train_act", r.train_action_acc);
  show("test_grasp", r.test_grasp_acc);
  show("test_obj", r.test_object_acc);
  show("test_act", r.test_action_acc);
  show("test_video", r.test_video_acc);
  show("r2", r.test_curvature_r2);
  *progress << "\n" << std::flush;
}

// ---------------------------------------------------------------- stages

void run_local(Model& m, const Dataset& data, const PipelineConfig& c, const fs::path& dir, std::ostream* progress) {
  const auto& s = c.train.local;
  const auto kind = c.model.curvature;
  auto params = m.generator.local_parameters();
  nn::zero_grads(params);
  nn::SgdMomentum opt(params, c.train.momentum);
  Rng rng = Rng::derive(c.train.seed, 101);
  std::vector<std::size_t> order = data.frame_indices(true);
  const std::vector<std::size_t> test = data.frame_indices(false);
  for (int epoch = 0; epoch < s.epochs; ++epoch) {
    shuffle(order, rng);
    Running run;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(s.batch)) {
      const std::span<const std::size_t> idx(order.data() + start,
                                             std::min(order.size() - start, static_cast<std::size_t>(s.batch)));
      const FrameBatch b = make_batch(data, idx, kind, &c.train.augment, &rng);
      const LocalOutput out = m.generator.forward_local(b.hand);
      const LocalLoss l = loss_local(out.grasp_logits, b.grasp, out.curvature, b.curvature, b.vertex_mask, c.weights);
      require_finite(l.value, "local stage");
      m.generator.backward_local(l.d_grasp_logits, l.d_curvature);
      step(params, opt, s, c.train.clip_norm, epoch);
      const double w = static_cast<double>(idx.size());
      run.n += idx.size();
      run.loss += w * l.value;
      run.grasp += w * l.grasp_ce;
      run.curv += w * l.curvature_l2;
      run.add_hits(nn::argmax_rows(out.grasp_logits), b.grasp, run.grasp_hit);
    }
    const FrameOutputs eval = run_generator(m.generator, data, test, kind);
    MetricsRow r;
    r.stage = "local";
    r.epoch = epoch;
    r.lr = nn::SgdSchedule{s.lr, s.halving_period}.lr(epoch);
    r.loss = run.mean(run.loss);
    r.grasp_ce = run.mean(run.grasp);
    if (kind) r.curvature_l2 = run.mean(run.curv);
    r.train_grasp_acc = run.mean(static_cast<double>(run.grasp_hit));
    r.test_grasp_acc = accuracy(eval.grasp, labels_of(data, test, &FrameSample::grasp));
    r.test_curvature_r2 = pooled_r2(eval);
    append_metrics(dir, r);
    log_row(progress, r);
  }
}

void run_object(Model& m, const Dataset& data, const PipelineConfig& c, const fs::path& dir, std::ostream* progress) {
  const auto& s = c.train.object;
  auto params = m.generator.object_parameters();
  nn::zero_grads(params);
  nn::SgdMomentum opt(params, c.train.momentum);
  Rng rng = Rng::derive(c.train.seed, 102);
  std::vector<std::size_t> order;
  for (std::size_t i : data.frame_indices(true)) {
    if (!data.frames[i].object.empty()) order.push_back(i);
  }
  const std::vector<std::size_t> test = data.frame_indices(false);
  for (int epoch = 0; epoch < s.epochs; ++epoch) {
    shuffle(order, rng);
    Running run;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(s.batch)) {
      const std::span<const std::size_t> idx(order.data() + start,
                                             std::min(order.size() - start, static_cast<std::size_t>(s.batch)));
      const FrameBatch b = make_batch(data, idx, std::nullopt, &c.train.augment, &rng);
      const ObjectOutput out = m.generator.forward_object(b.object, b.has_object);
      const nn::LossResult l = loss_object(out.logits, b.object_id, b.has_object);
      require_finite(l.value, "object stage");
      m.generator.backward_object(l.grad);
      step(params, opt, s, c.train.clip_norm, epoch);
      run.n += idx.size();
      run.loss += static_cast<double>(idx.size()) * l.value;
      run.add_hits(nn::argmax_rows(out.logits), b.object_id, run.object_hit);
    }
    const FrameOutputs eval = run_generator(m.generator, data, test, c.model.curvature);
    std::size_t hit = 0, n = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      if (data.frames[test[i]].object.empty()) continue;
      ++n;
      hit += eval.object[i] == data.frames[test[i]].object_id;
    }
    MetricsRow r;
    r.stage = "object";
    r.epoch = epoch;
    r.lr = nn::SgdSchedule{s.lr, s.halving_period}.lr(epoch);
    r.loss = run.mean(run.loss);
    r.object_ce = r.loss;
    r.train_object_acc = run.mean(static_cast<double>(run.object_hit));
    r.test_object_acc = n ? static_cast<double>(hit) / n : 0.0;
    append_metrics(dir, r);
    log_row(progress, r);
  }
}

void run_joint(Model& m, const Dataset& data, const PipelineConfig& c, const fs::path& dir, std::ostream* progress) {
  const auto& s = c.train.joint;
  const auto kind = c.model.curvature;
  auto params = m.generator.parameters();
  nn::zero_grads(params);
  nn::SgdMomentum opt(params, c.train.momentum);
  Rng rng = Rng::derive(c.train.seed, 103);
  std::vector<std::size_t> order = data.frame_indices(true);
  const std::vector<std::size_t> test = data.frame_indices(false);
  for (int epoch = 0; epoch < s.epochs; ++epoch) {
    shuffle(order, rng);
    Running run;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(s.batch)) {
      const std::span<const std::size_t> idx(order.data() + start,
                                             std::min(order.size() - start, static_cast<std::size_t>(s.batch)));
      const FrameBatch b = make_batch(data, idx, kind, &c.train.augment, &rng);
      const GeneratorOutput out = m.generator.forward(b, Mode::Train);
      const JointLoss l = joint_loss(out, b, c.weights);
      require_finite(l.value, "joint stage");
      m.generator.backward(l.grads);
      step(params, opt, s, c.train.clip_norm, epoch);
      const double w = static_cast<double>(idx.size());
      run.n += idx.size();
      run.loss += w * l.value;
      run.grasp += w * l.grasp_ce;
      run.curv += w * l.curvature_l2;
      run.object += w * l.object_ce;
      run.action += w * l.action_ce;
      run.add_hits(nn::argmax_rows(out.local.grasp_logits), b.grasp, run.grasp_hit);
      run.add_hits(nn::argmax_rows(out.mixture.logits), b.action, run.action_hit);
      const auto op = nn::argmax_rows(out.object.logits);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        if (!b.has_object[i]) continue;
        ++run.object_n;
        run.object_hit += op[i] == b.object_id[i];
      }
    }
    const FrameOutputs eval = run_generator(m.generator, data, test, kind);
    std::size_t hit = 0, n = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      if (data.frames[test[i]].object.empty()) continue;
      ++n;
      hit += eval.object[i] == data.frames[test[i]].object_id;
    }
    MetricsRow r;
    r.stage = "joint";
    r.epoch = epoch;
    r.lr = nn::SgdSchedule{s.lr, s.halving_period}.lr(epoch);
    r.loss = run.mean(run.loss);
    r.grasp_ce = run.mean(run.grasp);
    if (kind) r.curvature_l2 = run.mean(run.curv);
    r.object_ce = run.mean(run.object);
    r.action_ce = run.mean(run.action);
    r.train_grasp_acc = run.mean(static_cast<double>(run.grasp_hit));
    r.train_object_acc = run.object_n ? static_cast<double>(run.object_hit) / run.object_n : 0.0;
    r.train_action_acc = run.mean(static_cast<double>(run.action_hit));
    r.test_grasp_acc = accuracy(eval.grasp, labels_of(data, test, &FrameSample::grasp));
    r.test_object_acc = n ? static_cast<double>(hit) / n : 0.0;
    r.test_action_acc = accuracy(eval.action, labels_of(data, test, &FrameSample::action));
    r.test_curvature_r2 = pooled_r2(eval);
    append_metrics(dir, r);
    log_row(progress, r);
  }
}

void run_temporal(Model& m, const Dataset& data, const PipelineConfig& c, const fs::path& dir,
                  std::ostream* progress) {
  const auto& s = c.train.temporal;
  const std::string before = nn::serialize_parameters(m.generator.parameters());
  const Tensor emb = all_embeddings(m.generator, data);

  auto params = m.temporal.parameters();
  nn::zero_grads(params);
  nn::SgdMomentum opt(params, c.train.momentum);
  Rng rng = Rng::derive(c.train.seed, 104);
  const std::vector<std::size_t> train = data.episode_indices(true);
  const std::vector<std::size_t> test = data.episode_indices(false);
  for (int epoch = 0; epoch < s.epochs; ++epoch) {
    Running run;
    for (auto [len, group] : by_length(data, train)) {
      (void)len;
      shuffle(group, rng);
      for (std::size_t start = 0; start < group.size(); start += static_cast<std::size_t>(s.batch)) {
        const std::vector<std::size_t> chunk(
            group.begin() + start, group.begin() + std::min(group.size(), start + static_cast<std::size_t>(s.batch)));
        std::vector<int> y;
        for (std::size_t e : chunk) y.push_back(data.episodes[e].action);
        const temporal::TemporalOutput out = m.temporal.forward(sequence(data, emb, chunk));
        const temporal::TemporalLoss l = temporal::loss_action_temporal(out, y);
        require_finite(l.value, "temporal stage");
        m.temporal.backward(l.d_frame_logits, l.d_video_logits);
        step(params, opt, s, c.train.clip_norm, epoch);
        run.n += chunk.size();
        run.loss += static_cast<double>(chunk.size()) * l.value;
        run.action += static_cast<double>(chunk.size()) * l.video_term;
        run.add_hits(nn::argmax_rows(out.video_logits), y, run.action_hit);
      }
    }
    std::vector<int> truth;
    const std::vector<int> pred = predict_videos(m.temporal, data, emb, test, &truth);
    MetricsRow r;
    r.stage = "temporal";
    r.epoch = epoch;
    r.lr = nn::SgdSchedule{s.lr, s.halving_period}.lr(epoch);
    r.loss = run.mean(run.loss);
    r.action_ce = run.mean(run.action);
    r.train_action_acc = run.mean(static_cast<double>(run.action_hit));
    r.test_video_acc = accuracy(pred, truth);
    append_metrics(dir, r);
    log_row(progress, r);
  }
  if (nn::serialize_parameters(m.generator.parameters()) != before) {
    throw std::logic_error("temporal stage modified generator parameters");
  }
}

}  // namespace

std::set<std::string> completed_stages(const fs::path& run_dir) {
  std::set<std::string> out;
  std::ifstream f(run_dir / "stages.txt");
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty()) out.insert(line);
  }
  return out;
}

void train_stages(const Dataset& data, const PipelineConfig& config, Stage stage, const fs::path& dir,
                  std::ostream* progress) {
  const PipelineConfig c = resolve_for_dataset(config, data);
  validate(c);
  fs::create_directories(dir);
  std::set<std::string> done = completed_stages(dir);
  if (stage == Stage::All) {
    for (const char* f : {"metrics.csv", "stages.txt", "generator.ckpt", "temporal.ckpt"}) fs::remove(dir / f);
    done.clear();
  }
  auto need = [&](const char* s) {
    if (!done.count(s)) {
      throw TrainingError(TrainingError::Kind::MissingStage, "stage '" + to_string(stage) + "' needs stage '" + s +
                                                                 "' to have run in " + dir.string());
    }
  };
  if (stage == Stage::Joint) {
    need("local");
    need("object");
  }
  if (stage == Stage::Temporal) need("joint");

  write_file(dir / "config.ini", config_to_ini(c).format());
  Model m = make_model(c);
  const fs::path gen_ckpt = dir / "generator.ckpt";
  if (stage != Stage::All && fs::exists(gen_ckpt)) nn::load_checkpoint(gen_ckpt, m.generator.parameters());

  auto finish = [&](const char* s) {
    done.insert(s);
    save_stages(dir, done);
  };
  if (stage == Stage::Local || stage == Stage::All) {
    run_local(m, data, c, dir, progress);
    nn::save_checkpoint(gen_ckpt, m.generator.parameters());
    done.erase("joint");
    done.erase("temporal");
    finish("local");
  }
  if (stage == Stage::Object || stage == Stage::All) {
    run_object(m, data, c, dir, progress);
    nn::save_checkpoint(gen_ckpt, m.generator.parameters());
    done.erase("joint");
    done.erase("temporal");
    finish("object");
  }
  if (stage == Stage::Joint || stage == Stage::All) {
    run_joint(m, data, c, dir, progress);
    nn::save_checkpoint(gen_ckpt, m.generator.parameters());
    done.erase("temporal");
    finish("joint");
  }
  if (stage == Stage::Temporal || stage == Stage::All) {
    run_temporal(m, data, c, dir, progress);
    nn::save_checkpoint(dir / "temporal.ckpt", m.temporal.parameters());
    finish("temporal");
  }
}

Model load_model(const fs::path& dir, PipelineConfig& config, bool& has_temporal) {
  if (!fs::exists(dir / "config.ini") || !fs::exists(dir / "generator.ckpt")) {
    throw TrainingError(TrainingError::Kind::MissingStage, dir.string() + " holds no trained generator");
  }
  config = config_from_ini(IniFile::load(dir / "config.ini"));
  Model m = make_model(config);
  nn::load_checkpoint(dir / "generator.ckpt", m.generator.parameters());
  has_temporal = fs::exists(dir / "temporal.ckpt");
  if (has_temporal) nn::load_checkpoint(dir / "temporal.ckpt", m.temporal.parameters());
  return m;
}

// ---------------------------------------------------------------- evaluation

FrameOutputs run_generator(FrameGenerator& g, const Dataset& data, const std::vector<std::size_t>& frames,
                           const std::optional<mesh::CurvatureKind>& kind, std::size_t batch) {
  FrameOutputs out;
  out.embeddings = Tensor({frames.size(), g.embedding_width()});
  const bool regress = kind.has_value() && g.has_curvature();
  for (std::size_t start = 0; start < frames.size(); start += batch) {
    const std::span<const std::size_t> idx(frames.data() + start, std::min(frames.size() - start, batch));
    const FrameBatch b = make_batch(data, idx, regress ? kind : std::nullopt);
    const GeneratorOutput o = g.forward(b, Mode::Eval);
    for (int v : nn::argmax_rows(o.local.grasp_logits)) out.grasp.push_back(v);
    for (int v : nn::argmax_rows(o.object.logits)) out.object.push_back(v);
    for (int v : nn::argmax_rows(o.mixture.logits)) out.action.push_back(v);
    const std::size_t w = o.mixture.embedding.cols();
    std::copy(o.mixture.embedding.data(), o.mixture.embedding.data() + idx.size() * w,
              out.embeddings.data() + start * w);
    if (regress) {
      const std::size_t v = b.curvature.cols();
      for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t k = 0; k < v; ++k) {
          if (!b.vertex_mask[k]) continue;
          const double t = b.curvature.at(i, k);
          const double r = o.local.curvature.at(i, k) - t;
          out.curvature_sse += r * r;
          out.curvature_sum += t;
          out.curvature_sumsq += t * t;
          ++out.curvature_count;
        }
      }
    }
  }
  return out;
}

std::optional<double> pooled_r2(const FrameOutputs& o) {
  if (o.curvature_count == 0) return std::nullopt;
  const double n = static_cast<double>(o.curvature_count);
  const double sst = o.curvature_sumsq - o.curvature_sum * o.curvature_sum / n;
  if (!(sst > 0)) return std::nullopt;
  return 1.0 - o.curvature_sse / sst;
}

EvalReport evaluate(Model& m, const PipelineConfig& c, const Dataset& data, bool has_temporal, bool train) {
  EvalReport rep;
  const std::vector<std::size_t> frames = data.frame_indices(train);
  const std::vector<std::size_t> eps = data.episode_indices(train);
  rep.frames = static_cast<int>(frames.size());
  rep.episodes = static_cast<int>(eps.size());
  const FrameOutputs o = run_generator(m.generator, data, frames, c.model.curvature);

  const auto ch = static_cast<std::size_t>(data.grasp_classes);
  const auto ca = static_cast<std::size_t>(data.action_classes);
  rep.grasp_confusion.assign(ch, std::vector<int>(ch, 0));
  rep.action_confusion.assign(ca, std::vector<int>(ca, 0));
  std::size_t grasp_hit = 0, action_hit = 0, object_hit = 0, object_n = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const FrameSample& s = data.frames[frames[i]];
    grasp_hit += o.grasp[i] == s.grasp;
    action_hit += o.action[i] == s.action;
    ++rep.grasp_confusion[static_cast<std::size_t>(s.grasp)][static_cast<std::size_t>(o.grasp[i])];
    if (!s.object.empty()) {
      ++object_n;
      object_hit += o.object[i] == s.object_id;
    }
  }
  const double nf = std::max<double>(1, static_cast<double>(frames.size()));
  rep.grasp_accuracy = grasp_hit / nf;
  rep.frame_action_accuracy = action_hit / nf;
  rep.object_accuracy = object_n ? static_cast<double>(object_hit) / object_n : 0.0;
  if (o.curvature_count) {
    rep.curvature_mse = o.curvature_sse / static_cast<double>(o.curvature_count);
    rep.curvature_r2 = pooled_r2(o);
  }
  if (has_temporal && !eps.empty()) {
    // Embeddings are indexed by dataset frame in sequence(); scatter them.
    Tensor emb({data.frames.size(), o.embeddings.cols()});
    const std::size_t w = o.embeddings.cols();
    for (std::size_t i = 0; i < frames.size(); ++i) {
      std::copy(o.embeddings.data() + i * w, o.embeddings.data() + (i + 1) * w, emb.data() + frames[i] * w);
    }
    std::vector<int> truth;
    const std::vector<int> pred = predict_videos(m.temporal, data, emb, eps, &truth);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      hit += pred[i] == truth[i];
      ++rep.action_confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(pred[i])];
    }
    rep.video_accuracy = static_cast<double>(hit) / pred.size();
  }
  return rep;
}

void write_confusion_csv(std::ostream& out, const std::vector<std::vector<int>>& m) {
  out << "true";
  for (std::size_t j = 0; j < m.size(); ++j) out << ",pred_" << j;
  out << "\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << i;
    for (int v : m[i]) out << "," << v;
    out << "\n";
  }
}

}  // namespace handact::pipeline
