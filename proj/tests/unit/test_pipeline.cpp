// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "handact/nn/checkpoint.hpp"
#include "handact/nn/gradcheck.hpp"
#include "handact/nn/optim.hpp"
#include "handact/pipeline/dataset.hpp"
#include "handact/pipeline/training.hpp"
#include "pipeline_fixtures.hpp"

using namespace handact;
using namespace handact::pipeline;
using fixtures::tiny_model;
using fixtures::uniform_tensor;
using nn::Tensor;

namespace {

// log-softmax recomputed from scratch with long double, as an oracle.
double oracle_ce(const Tensor& logits, const std::vector<int>& y) {
  long double total = 0;
  for (std::size_t b = 0; b < logits.rows(); ++b) {
    long double m = logits.at(b, 0);
    for (std::size_t c = 1; c < logits.cols(); ++c) m = std::max<long double>(m, logits.at(b, c));
    long double z = 0;
    for (std::size_t c = 0; c < logits.cols(); ++c) z += std::exp(static_cast<long double>(logits.at(b, c)) - m);
    total += -(logits.at(b, static_cast<std::size_t>(y[b])) - m - std::log(z));
  }
  return static_cast<double>(total / logits.rows());
}

double norm(const nn::ParameterList& ps) {
  double s = 0;
  for (auto* p : ps) {
    for (double g : p->grad.values()) s += g * g;
  }
  return std::sqrt(s);
}

nn::GradCheckOptions opts() {
  nn::GradCheckOptions o;
  o.tolerance = 1e-4;
  return o;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("backbone: zero parameters give zero features, random ones separate patches") {
  Rng rng(1);
  Backbone bb("bb", 8, 2, 3, 5, rng);
  const Tensor zero({1, 3, 8, 8});
  Tensor a = uniform_tensor({1, 3, 8, 8}, rng), b = uniform_tensor({1, 3, 8, 8}, rng);
  CHECK(nn::l2_distance(bb.forward(a), bb.forward(b)) > 0.0);
  nn::zero_values(bb.parameters());
  const Tensor f = bb.forward(zero);
  CHECK(f.shape() == nn::Shape{1, 5});
  for (double v : f.values()) CHECK(v == 0.0);
  CHECK_THROWS_AS(bb.forward(Tensor({1, 3, 4, 4})), nn::NnError);
}

TEST_CASE("backbone: finite-difference gradients") {
  Rng rng(2);
  Backbone bb("bb", 4, 2, 2, 3, rng);
  const Tensor x = uniform_tensor({2, 3, 4, 4}, rng);
  const Tensor w = uniform_tensor({2, 3}, rng);
  auto loss = [&] {
    const Tensor f = bb.forward(x);
    double s = 0;
    for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i];
    return s;
  };
  const auto report = nn::gradient_check(
      bb.parameters(), loss,
      [&] {
        nn::zero_grads(bb.parameters());
        bb.forward(x);
        bb.backward(w);
      },
      opts());
  CHECK(report.checked > 0);
  CHECK(report.max_relative_error < 1e-4);
}

TEST_CASE("local network: shapes, reproducibility and joint gradients") {
  ModelConfig m;  // default widths
  Rng r1(5), r2(5);
  LocalNet a(128, 128, 64, 36, 256, 778, true, r1);
  LocalNet b(128, 128, 64, 36, 256, 778, true, r2);
  Rng in(6);
  const Tensor f = uniform_tensor({2, 128}, in);
  const LocalOutput oa = a.forward(f), ob = b.forward(f);
  CHECK(oa.curvature.shape() == nn::Shape{2, 778});
  CHECK(oa.grasp_logits.shape() == nn::Shape{2, 36});
  CHECK(oa.embedding.shape() == nn::Shape{2, 64});
  CHECK(oa.grasp_logits == ob.grasp_logits);
  CHECK(oa.curvature == ob.curvature);

  Rng r3(7);
  LocalNet net(3, 4, 3, 3, 4, 5, true, r3);
  const Tensor x = uniform_tensor({3, 3}, r3);
  const std::vector<int> y = {0, 2, 1};
  Tensor target({3, 5});
  for (double& v : target.values()) v = r3.normal();
  const std::vector<char> mask = {1, 1, 0, 1, 1};
  const LossWeights w;
  auto loss = [&] {
    const LocalOutput o = net.forward(x);
    return loss_local(o.grasp_logits, y, o.curvature, target, mask, w).value;
  };
  const auto report = nn::gradient_check(
      net.parameters(), loss,
      [&] {
        nn::zero_grads(net.parameters());
        const LocalOutput o = net.forward(x);
        const LocalLoss l = loss_local(o.grasp_logits, y, o.curvature, target, mask, w);
        net.backward(l.d_grasp_logits, Tensor(), l.d_curvature);
      },
      opts());
  CHECK(report.max_relative_error < 1e-4);
}

TEST_CASE("relation network: missing object, zero parameters, gradients") {
  Rng rng(8);
  RelationNet rel(3, 3, 4, 2, rng);
  const Tensor hand = uniform_tensor({2, 3}, rng);
  const Tensor absent({2, 3});
  const Tensor e = rel.forward(hand, absent);
  CHECK(e.shape() == nn::Shape{2, 2});
  CHECK(e.all_finite());

  const Tensor obj = uniform_tensor({2, 3}, rng);
  const Tensor w = uniform_tensor({2, 2}, rng);
  auto loss = [&] {
    const Tensor out = rel.forward(hand, obj);
    double s = 0;
    for (std::size_t i = 0; i < out.size(); ++i) s += w[i] * out[i];
    return s;
  };
  const auto report = nn::gradient_check(
      rel.parameters(), loss,
      [&] {
        nn::zero_grads(rel.parameters());
        rel.forward(hand, obj);
        rel.backward(w);
      },
      opts());
  CHECK(report.max_relative_error < 1e-4);

  nn::zero_values(rel.parameters());
  const Tensor zeroed = rel.forward(hand, obj);
  for (double v : zeroed.values()) CHECK(v == 0.0);
}

TEST_CASE("object network: embedding width, uniform logits, gradients") {
  Rng rng(9);
  ObjectNet net(128, 256, 5, rng);
  const Tensor f = uniform_tensor({4, 128}, rng);
  ObjectOutput o = net.forward(f);
  CHECK(o.embedding.shape() == nn::Shape{4, 256});
  // A zeroed head makes every logit equal.
  for (auto* p : net.parameters()) {
    if (p->name.rfind("object.head", 0) == 0) p->value.fill(0.0);
  }
  o = net.forward(f);
  const std::vector<int> y = {0, 1, 2, 4};
  CHECK(loss_object(o.logits, y).value == doctest::Approx(std::log(5.0)).epsilon(1e-12));

  Rng r2(10);
  ObjectNet small(3, 3, 2, r2);
  const Tensor x = uniform_tensor({3, 3}, r2);
  const std::vector<int> t = {1, 0, 1};
  const auto report = nn::gradient_check(
      small.parameters(), [&] { return loss_object(small.forward(x).logits, t).value; },
      [&] {
        nn::zero_grads(small.parameters());
        const ObjectOutput out = small.forward(x);
        small.backward(loss_object(out.logits, t).grad, Tensor());
      },
      opts());
  CHECK(report.max_relative_error < 1e-4);
}

TEST_CASE("mixture network: fixed width, canonical order enforced") {
  Rng rng(11);
  MixtureInputs in{3, 5, 2, 3, 4};
  MixtureNet mix(in, 6, 3, 0.0, 1, rng);
  const Tensor g = uniform_tensor({2, 3}, rng), c = uniform_tensor({2, 5}, rng), i = uniform_tensor({2, 2}, rng),
               o = uniform_tensor({2, 3}, rng), glob = uniform_tensor({2, 4}, rng);
  const MixtureOutput out = mix.forward({&g, &c, &i, &o, &glob}, Mode::Eval);
  CHECK(out.embedding.shape() == nn::Shape{2, 6});
  CHECK(out.logits.shape() == nn::Shape{2, 3});
  // Swapping two parts of different widths is caught.
  CHECK_THROWS_AS(mix.forward({&c, &g, &i, &o, &glob}, Mode::Eval), nn::NnError);
  // Swapping equal-width parts is not a shape error, but it changes the output.
  const MixtureOutput swapped = mix.forward({&o, &c, &i, &g, &glob}, Mode::Eval);
  CHECK(nn::l2_distance(swapped.logits, out.logits) > 0.0);
  CHECK(in.total() == 17);
}

TEST_CASE("full generator: end-to-end finite-difference gradients") {
  const ModelConfig m = tiny_model();
  FrameGenerator gen(m, 12);
  Rng rng(13);
  const FrameBatch batch = fixtures::random_batch(m, 3, rng);
  fixtures::jitter_biases(gen.parameters(), rng);
  const LossWeights w;
  gen.forward(batch, Mode::Train);
  gen.mixture().freeze_dropout(true);
  auto loss = [&] { return joint_loss(gen.forward(batch, Mode::Train), batch, w).value; };
  const auto report = nn::gradient_check(
      gen.parameters(), loss,
      [&] {
        nn::zero_grads(gen.parameters());
        const GeneratorOutput out = gen.forward(batch, Mode::Train);
        gen.backward(joint_loss(out, batch, w).grads);
      },
      opts());
  INFO("worst " << report.worst_parameter << "[" << report.worst_index << "] analytic " << report.worst_analytic
                 << " numeric " << report.worst_numeric);
  CHECK(report.checked == nn::count_scalars(gen.parameters()));
  CHECK(report.max_relative_error < 1e-4);
}

TEST_CASE("full generator without curvature head: gradients") {
  ModelConfig m = tiny_model();
  m.curvature = std::nullopt;
  FrameGenerator gen(m, 14);
  Rng rng(15);
  const FrameBatch batch = fixtures::random_batch(m, 3, rng, false);
  fixtures::jitter_biases(gen.parameters(), rng);
  const LossWeights w;
  gen.forward(batch, Mode::Train);
  gen.mixture().freeze_dropout(true);
  const auto report = nn::gradient_check(
      gen.parameters(), [&] { return joint_loss(gen.forward(batch, Mode::Train), batch, w).value; },
      [&] {
        nn::zero_grads(gen.parameters());
        const GeneratorOutput out = gen.forward(batch, Mode::Train);
        gen.backward(joint_loss(out, batch, w).grads);
      },
      opts());
  CHECK(report.max_relative_error < 1e-4);
}

TEST_CASE("joint objective reaches every subnetwork") {
  const ModelConfig m = tiny_model();
  FrameGenerator gen(m, 16);
  Rng rng(17);
  const FrameBatch batch = fixtures::random_batch(m, 4, rng);
  nn::zero_grads(gen.parameters());
  const GeneratorOutput out = gen.forward(batch, Mode::Train);
  gen.backward(joint_loss(out, batch, LossWeights{}).grads);
  CHECK(norm(gen.local_parameters()) > 0.0);
  CHECK(norm(gen.object_parameters()) > 0.0);
  CHECK(norm(gen.mixture().parameters()) > 0.0);
}

TEST_CASE("object loss: one-hot, uniform, independent recomputation, masking") {
  Tensor perfect({2, 3}, {1000, 0, 0, 0, 0, 1000});
  CHECK(loss_object(perfect, std::vector<int>{0, 2}).value == 0.0);
  const Tensor uniform({2, 4});
  CHECK(loss_object(uniform, std::vector<int>{1, 3}).value == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  Rng rng(18);
  Tensor logits({5, 4});
  for (double& v : logits.values()) v = 3 * rng.normal();
  const std::vector<int> y = {0, 3, 2, 2, 1};
  CHECK(loss_object(logits, y).value == doctest::Approx(oracle_ce(logits, y)).epsilon(1e-12));
  // Absent rows neither cost nor receive gradient.
  const std::vector<char> present = {1, 0, 1, 0, 1};
  const auto masked = loss_object(logits, y, present);
  const Tensor kept = nn::gather_rows(logits, std::vector<std::size_t>{0, 2, 4});
  CHECK(masked.value == doctest::Approx(oracle_ce(kept, {0, 2, 1})).epsilon(1e-12));
  for (std::size_t c = 0; c < 4; ++c) CHECK(masked.grad.at(1, c) == 0.0);
  CHECK(loss_object(logits, y, std::vector<char>(5, 0)).value == 0.0);
}

TEST_CASE("local loss arithmetic") {
  const LossWeights w;
  const std::vector<int> y = {4};
  // Uniform 36-way logits, residual of one on all 778 vertices.
  const Tensor logits({1, 36});
  const Tensor pred({1, 778}, 1.0), target({1, 778}, 0.0);
  const std::vector<char> all(778, 1);
  const LocalLoss l = loss_local(logits, y, pred, target, all, w);
  CHECK(l.value == doctest::Approx(std::log(36.0) + 233.4).epsilon(1e-12));
  CHECK(l.grasp_ce == doctest::Approx(std::log(36.0)).epsilon(1e-12));
  CHECK(l.curvature_l2 == doctest::Approx(778.0).epsilon(1e-12));

  // Residual only on masked vertices: the regression term vanishes.
  Tensor p2({1, 778}, 0.0);
  std::vector<char> mask(778, 1);
  for (std::size_t v = 0; v < 16; ++v) {
    mask[v] = 0;
    p2[v] = 5.0;
  }
  const LocalLoss l2 = loss_local(logits, y, p2, target, mask, w);
  CHECK(l2.value == doctest::Approx(std::log(36.0)).epsilon(1e-12));

  Tensor perfect({1, 36});
  perfect[4] = 1000;
  CHECK(loss_local(perfect, y, target, target, all, w).value == 0.0);
  CHECK(w.alpha == 0.3);
  CHECK(w.beta == 0.2);
  CHECK(w.kappa == 0.5);
}

TEST_CASE("frame action loss arithmetic") {
  const LossWeights w;
  Tensor perfect({1, 3});
  perfect[1] = 1000;
  CHECK(loss_action_frame(perfect, std::vector<int>{1}, 0.0, 0.0, w).value == 0.0);
  // Two logits chosen so that the cross entropy is exactly one nat.
  Tensor one({1, 2}, {0.0, std::log(std::exp(1.0) - 1.0)});
  const ActionLoss a = loss_action_frame(one, std::vector<int>{0}, 2.0, 4.0, w);
  CHECK(a.action_ce == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.value == doctest::Approx(3.4).epsilon(1e-12));

  const ModelConfig m = tiny_model();
  FrameGenerator gen(m, 19);
  Rng rng(20);
  const FrameBatch batch = fixtures::random_batch(m, 5, rng);
  const JointLoss j = joint_loss(gen.forward(batch, Mode::Eval), batch, w);
  const double local = j.grasp_ce + 0.3 * j.curvature_l2;
  const double expect = j.action_ce + 0.2 * j.object_ce + 0.5 * local;
  CHECK(std::abs(j.value - expect) <= 1e-12 * std::abs(expect));
}

TEST_CASE("frame logits depend on crop content, not on where the crop was taken") {
  // Same content drawn at two places; boxes follow it, global feature held fixed.
  detect::Image a(32, 32, 3, 0.2), b(32, 32, 3, 0.2);
  Rng rng(21);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = rng.uniform();
        a.at(4 + x, 4 + y, c) = v;
        b.at(20 + x, 12 + y, c) = v;
      }
    }
  }
  detect::BoundingBox ba{4 / 32.0, 4 / 32.0, 8 / 32.0, 8 / 32.0, detect::BoxClass::Hand, detect::Side::Right};
  detect::BoundingBox bb{20 / 32.0, 12 / 32.0, 8 / 32.0, 8 / 32.0, detect::BoxClass::Hand, detect::Side::Right};
  const Tensor pa(nn::Shape{1, 3, 4, 4}, to_chw(detect::crop_and_resize(a, ba, 4)));
  const Tensor pb(nn::Shape{1, 3, 4, 4}, to_chw(detect::crop_and_resize(b, bb, 4)));
  CHECK(pa == pb);

  const ModelConfig m = tiny_model();
  FrameGenerator gen(m, 22);
  FrameBatch batch = fixtures::random_batch(m, 1, rng);
  batch.hand = pa;
  const Tensor first = gen.forward(batch, Mode::Eval).mixture.logits;
  batch.hand = pb;
  CHECK(gen.forward(batch, Mode::Eval).mixture.logits == first);
}

TEST_CASE("augment_patch: identity settings and bounds") {
  Rng rng(23);
  detect::Image p(8, 8, 3);
  for (double& v : p.data) v = rng.uniform();
  AugmentConfig off;
  off.enabled = false;
  CHECK(augment_patch(p, off, rng) == p);
  AugmentConfig zero;
  zero.enabled = true;
  zero.color = 0.0;
  zero.geometric = 0.0;
  CHECK(augment_patch(p, zero, rng) == p);
  AugmentConfig on;
  on.enabled = true;
  on.color = 0.5;
  on.geometric = 0.1;
  bool changed = false;
  for (int i = 0; i < 50; ++i) {
    const detect::Image q = augment_patch(p, on, rng);
    for (double v : q.data) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    changed = changed || !(q == p);
  }
  CHECK(changed);
  const auto back = from_chw(to_chw(p), 8);
  CHECK(back == p);
}

TEST_CASE("config: defaults, round trip and unknown keys") {
  const PipelineConfig d;
  CHECK(d.train.local.lr == 0.0004);
  CHECK(d.train.local.batch == 64);
  CHECK(d.train.temporal.lr == 0.001);
  CHECK(d.temporal.hidden == 256);
  CHECK(d.temporal.layers == 2);
  CHECK(d.model.object_embedding == 256);
  CHECK(d.model.backbone_features == 128);
  CHECK(d.model.interaction == 64);
  CHECK(d.model.mixture_width == 256);

  IniFile ini = IniFile::parse("seed = 9\n[model]\ncurvature = none\n[joint]\nlr = 0.25\n[temporal]\nhidden = 12\n");
  const PipelineConfig c = config_from_ini(ini);
  CHECK(c.train.seed == 9);
  CHECK(!c.model.curvature.has_value());
  CHECK(c.train.joint.lr == 0.25);
  CHECK(c.temporal.hidden == 12);
  const PipelineConfig again = config_from_ini(config_to_ini(c));
  CHECK(config_to_ini(again).format() == config_to_ini(c).format());

  CHECK_THROWS_AS(config_from_ini(IniFile::parse("[model]\ncurvatur = mean\n")), ConfigError);
  CHECK_THROWS_AS(config_from_ini(IniFile::parse("[model]\ncurvature = sharp\n")), ConfigError);
  CHECK_NOTHROW(config_from_ini(IniFile::parse("[generator]\nn_actions = 4\n")));
  PipelineConfig bad;
  bad.weights.beta = 0.0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("dataset: loads every frame with four curvature kinds") {
  const Dataset data = load_dataset(fixtures::small_corpus(), 8);
  CHECK(data.frames.size() == 4u * 5u * 4u);
  CHECK(data.episodes.size() == 20u);
  CHECK(data.vertices == 778);
  CHECK(data.grasp_classes == 36);
  std::size_t masked = 0;
  for (char k : data.vertex_mask[0]) masked += k == 0;
  CHECK(masked == 16u);
  for (const auto& s : data.frames) {
    CHECK(s.hand.size() == 3u * 8u * 8u);
    CHECK(s.global.size() == static_cast<std::size_t>(detect::kGlobalFeatureWidth));
    for (const auto& field : s.curvature) CHECK(field.size() == 778u);
  }
  // Principal curvatures recombine into the mean and Gaussian fields.
  const auto& s = data.frames[3];
  for (std::size_t v = 0; v < 778; ++v) {
    if (!data.vertex_mask[0][v]) continue;
    CHECK(s.curvature[2][v] + s.curvature[3][v] == doctest::Approx(2 * s.curvature[0][v]).epsilon(1e-9));
  }
  const auto train = data.frame_indices(true), test = data.frame_indices(false);
  CHECK(train.size() + test.size() == data.frames.size());
  const FrameBatch b = make_batch(data, std::vector<std::size_t>{0, 1}, mesh::CurvatureKind::Mean);
  CHECK(b.curvature.shape() == nn::Shape{2, 778});
  CHECK(b.hand.shape() == nn::Shape{2, 3, 8, 8});
}

namespace {

PipelineConfig quick_config() {
  PipelineConfig c;
  c.model.patch_size = 8;
  c.model.conv1_channels = 4;
  c.model.conv2_channels = 4;
  c.model.backbone_features = 16;
  c.model.local_hidden = 16;
  c.model.grasp_embedding = 8;
  c.model.curvature_hidden = 16;
  c.model.relation_hidden = 8;
  c.model.interaction = 8;
  c.model.object_embedding = 16;
  c.model.mixture_width = 16;
  c.temporal.input = 16;
  c.temporal.hidden = 8;
  c.temporal.fc1 = 8;
  c.temporal.fc2 = 8;
  for (auto* s : {&c.train.local, &c.train.object, &c.train.joint, &c.train.temporal}) {
    s->epochs = 3;
    s->lr = 0.01;
    s->batch = 16;
  }
  c.train.local.epochs = 10;
  c.train.temporal.batch = 4;
  return c;
}

std::vector<double> column(const std::string& csv, const std::string& stage, std::size_t col) {
  std::vector<double> out;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f[0] == stage) out.push_back(std::stod(f[col]));
  }
  return out;
}

}  // namespace

TEST_CASE("staged training: loss falls, stages chain, temporal stage freezes the generator") {
  const Dataset data = load_dataset(fixtures::small_corpus(), 8);
  const PipelineConfig c = quick_config();
  const auto dir = fixtures::fresh_dir("handact_stage_test");

  CHECK_THROWS_AS(train_stages(data, c, Stage::Temporal, dir), TrainingError);
  CHECK_THROWS_AS(train_stages(data, c, Stage::Joint, dir), TrainingError);

  train_stages(data, c, Stage::Local, dir);
  const auto loss = column(read_file(dir / "metrics.csv"), "local", 3);
  REQUIRE(loss.size() == 10u);
  CHECK(loss.back() < loss.front());
  CHECK_THROWS_AS(train_stages(data, c, Stage::Joint, dir), TrainingError);
  train_stages(data, c, Stage::Object, dir);
  train_stages(data, c, Stage::Joint, dir);
  CHECK(completed_stages(dir) == std::set<std::string>{"local", "object", "joint"});

  const std::string before = read_file(dir / "generator.ckpt");
  train_stages(data, c, Stage::Temporal, dir);
  CHECK(read_file(dir / "generator.ckpt") == before);
  CHECK(completed_stages(dir).count("temporal") == 1);

  std::ifstream f(dir / "metrics.csv");
  std::string header;
  std::getline(f, header);
  CHECK(header == metrics_header());
  CHECK(header ==
        "stage,epoch,lr,loss,grasp_ce,curvature_l2,object_ce,action_ce,train_grasp_acc,train_object_acc,"
        "train_action_acc,test_grasp_acc,test_object_acc,test_action_acc,test_video_acc,test_curvature_r2");

  PipelineConfig loaded;
  bool has_temporal = false;
  Model m = load_model(dir, loaded, has_temporal);
  CHECK(has_temporal);
  const EvalReport r = evaluate(m, loaded, data, true);
  CHECK(r.episodes == static_cast<int>(data.episode_indices(false).size()));
  int total = 0;
  for (const auto& row : r.action_confusion) {
    for (int v : row) total += v;
  }
  CHECK(total == r.episodes);
  CHECK(r.curvature_r2.has_value());
}

TEST_CASE("staged training is deterministic under a fixed seed") {
  const Dataset data = load_dataset(fixtures::small_corpus(), 8);
  PipelineConfig c = quick_config();
  c.train.local.epochs = 2;
  const auto a = fixtures::fresh_dir("handact_det_a"), b = fixtures::fresh_dir("handact_det_b");
  train_stages(data, c, Stage::All, a);
  train_stages(data, c, Stage::All, b);
  CHECK(read_file(a / "metrics.csv") == read_file(b / "metrics.csv"));
  CHECK(read_file(a / "generator.ckpt") == read_file(b / "generator.ckpt"));
  CHECK(read_file(a / "temporal.ckpt") == read_file(b / "temporal.ckpt"));
}

TEST_CASE("non-finite loss aborts training with a diagnostic") {
  const Dataset data = load_dataset(fixtures::small_corpus(), 8);
  PipelineConfig c = quick_config();
  c.train.local.lr = 1e300;
  c.train.clip_norm = 0.0;
  c.train.local.epochs = 3;
  const auto dir = fixtures::fresh_dir("handact_nan");
  try {
    train_stages(data, c, Stage::Local, dir);
    FAIL("expected a failure");
  } catch (const TrainingError& e) {
    CHECK(e.kind() == TrainingError::Kind::NonFiniteLoss);
  } catch (const nn::NnError& e) {
    CHECK(e.kind() == nn::NnError::Kind::NonFiniteGradient);
  }
}
