// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "handact/nn/gradcheck.hpp"
#include "handact/temporal/temporal.hpp"

using namespace handact;
using namespace handact::temporal;
using nn::Tensor;

namespace {

TemporalConfig small(int classes = 4) {
  TemporalConfig c;
  c.input = 3;
  c.layers = 2;
  c.hidden = 2;
  c.fc1 = 3;
  c.fc2 = 3;
  c.classes = classes;
  return c;
}

std::vector<Tensor> random_seq(std::size_t n, std::size_t b, std::size_t d, Rng& rng) {
  std::vector<Tensor> seq;
  for (std::size_t t = 0; t < n; ++t) {
    Tensor x({b, d});
    for (double& v : x.values()) v = rng.normal();
    seq.push_back(std::move(x));
  }
  return seq;
}

// Recurrent weights zero and update gate pinned open: every step outputs
// tanh(W_h x + b_h) regardless of history.
void make_memoryless(TemporalModel& m) {
  for (std::size_t l = 0; l < m.gru().layers(); ++l) {
    for (nn::GruCell* c : {&m.gru().forward_cell(l), &m.gru().backward_cell(l)}) {
      c->u_z.value.fill(0.0);
      c->u_r.value.fill(0.0);
      c->u_h.value.fill(0.0);
      c->w_z.value.fill(0.0);
      c->b_z.value.fill(40.0);
    }
  }
}

Tensor stack(const Tensor& row, std::size_t n) {
  Tensor out({n, row.cols()});
  for (std::size_t t = 0; t < n; ++t) std::copy(row.data(), row.data() + row.cols(), out.data() + t * row.cols());
  return out;
}

}  // namespace

TEST_CASE("temporal model: shapes, single step and empty input") {
  Rng rng(1);
  TemporalModel m(small(), rng);
  const auto seq = random_seq(5, 2, 3, rng);
  const TemporalOutput out = m.forward(seq);
  CHECK(out.frame_logits.size() == 5u);
  CHECK(out.frame_logits[0].shape() == nn::Shape{2, 4});
  CHECK(out.video_logits.shape() == nn::Shape{2, 4});

  const auto one = random_seq(1, 1, 3, rng);
  const EpisodePrediction p = m.predict(one[0]);
  CHECK(p.frame_logits.shape() == nn::Shape{1, 4});
  CHECK(p.video_logits.all_finite());
  CHECK_THROWS_AS(m.forward({}), nn::NnError);
  CHECK_THROWS_AS(m.predict(Tensor()), nn::NnError);

  TemporalConfig bad = small();
  bad.layers = 0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("temporal model: repeated identical frames pool to the same video logits") {
  Rng rng(2);
  TemporalModel m(small(), rng);
  make_memoryless(m);
  Tensor frame({1, 3});
  for (double& v : frame.values()) v = rng.normal();
  const Tensor v4 = m.predict(stack(frame, 4)).video_logits;
  const Tensor v8 = m.predict(stack(frame, 8)).video_logits;
  // summing N copies rounds differently for different N
  for (std::size_t i = 0; i < v4.size(); ++i) CHECK(v8[i] == doctest::Approx(v4[i]).epsilon(1e-14));
  const Tensor v3 = m.predict(stack(frame, 3)).video_logits;
  const Tensor v6 = m.predict(stack(frame, 6)).video_logits;
  for (std::size_t i = 0; i < v3.size(); ++i) CHECK(v6[i] == doctest::Approx(v3[i]).epsilon(1e-14));
  const Tensor v1 = m.predict(stack(frame, 1)).video_logits;
  for (std::size_t i = 0; i < v1.size(); ++i) CHECK(v4[i] == doctest::Approx(v1[i]).epsilon(1e-14));
}

TEST_CASE("temporal model: finite-difference gradients through GRU and heads") {
  Rng rng(3);
  TemporalModel m(small(3), rng);
  const auto seq = random_seq(4, 2, 3, rng);
  const std::vector<int> y = {2, 0};
  auto loss = [&] { return loss_action_temporal(m.forward(seq), y).value; };
  const auto report = nn::gradient_check(m.parameters(), loss, [&] {
    nn::zero_grads(m.parameters());
    const TemporalLoss l = loss_action_temporal(m.forward(seq), y);
    m.backward(l.d_frame_logits, l.d_video_logits);
  });
  INFO("worst " << report.worst_parameter);
  CHECK(report.checked == nn::count_scalars(m.parameters()));
  CHECK(report.max_relative_error < 1e-4);

  // Input gradients too.
  nn::zero_grads(m.parameters());
  const TemporalLoss l = loss_action_temporal(m.forward(seq), y);
  const std::vector<Tensor> dx = m.backward(l.d_frame_logits, l.d_video_logits);
  auto mutable_seq = seq;
  const auto input_report =
      nn::input_gradient_check(mutable_seq[1], dx[1], [&] { return loss_action_temporal(m.forward(mutable_seq), y).value; });
  CHECK(input_report.max_relative_error < 1e-4);
}

TEST_CASE("temporal loss arithmetic") {
  TemporalOutput perfect;
  Tensor hit({1, 3});
  hit[1] = 1000;
  perfect.frame_logits = {hit, hit, hit};
  perfect.video_logits = hit;
  CHECK(loss_action_temporal(perfect, std::vector<int>{1}).value == 0.0);

  TemporalOutput uniform;
  uniform.frame_logits.assign(5, Tensor({2, 7}));
  uniform.video_logits = Tensor({2, 7});
  const TemporalLoss u = loss_action_temporal(uniform, std::vector<int>{0, 6});
  CHECK(u.value == doctest::Approx(2 * std::log(7.0)).epsilon(1e-12));

  Rng rng(4);
  Tensor f({1, 4});
  for (double& v : f.values()) v = rng.normal();
  TemporalOutput shorter, longer;
  shorter.frame_logits.assign(3, f);
  longer.frame_logits.assign(6, f);
  shorter.video_logits = longer.video_logits = f;
  const std::vector<int> y = {2};
  CHECK(loss_action_temporal(shorter, y).frame_term ==
        doctest::Approx(loss_action_temporal(longer, y).frame_term).epsilon(1e-14));
}

TEST_CASE("predict_video: deterministic, shift invariant, sensitive to every frame") {
  Rng a(5), b(5);
  TemporalModel m1(small(), a), m2(small(), b);
  Rng in(6);
  Tensor episode({6, 3});
  for (double& v : episode.values()) v = in.normal();
  CHECK(predict_video(m1, episode) == predict_video(m2, episode));
  CHECK(m1.predict(episode).video_logits == m2.predict(episode).video_logits);

  Tensor logits = m1.predict(episode).video_logits;
  const int before = nn::argmax_rows(logits)[0];
  for (double& v : logits.values()) v += 123.25;
  CHECK(nn::argmax_rows(logits)[0] == before);

  const Tensor base = m1.predict(episode).video_logits;
  for (std::size_t t = 0; t < 6; ++t) {
    Tensor z = episode;
    for (std::size_t k = 0; k < 3; ++k) z.at(t, k) = 0.0;
    CHECK(nn::l2_distance(m1.predict(z).video_logits, base) > 0.0);
  }
}

TEST_CASE("temporal model: reversing time swaps the direction halves") {
  Rng rng(7);
  TemporalConfig c = small();
  c.layers = 1;
  TemporalModel m(c, rng);
  // Give both directions the same weights so that a reversed sequence is the mirror image.
  nn::GruCell& f = m.gru().forward_cell(0);
  nn::GruCell& bw = m.gru().backward_cell(0);
  auto pf = f.parameters(), pb = bw.parameters();
  for (std::size_t i = 0; i < pf.size(); ++i) pb[i]->value = pf[i]->value;
  const auto seq = random_seq(5, 1, 3, rng);
  std::vector<Tensor> rev(seq.rbegin(), seq.rend());
  const auto out = m.gru().forward(seq);
  const auto out_rev = m.gru().forward(rev);
  for (std::size_t t = 0; t < 5; ++t) {
    const Tensor& a = out[t];
    const Tensor& b = out_rev[4 - t];
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(a[k] == b[2 + k]);
      CHECK(a[2 + k] == b[k]);
    }
  }
}
