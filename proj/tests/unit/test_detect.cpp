// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "handact/detect/detection.hpp"

using namespace handact;
using namespace handact::detect;

namespace {

DetectionError::Kind error_kind_of(auto&& fn) {
  try {
    fn();
  } catch (const DetectionError& e) {
    return e.kind();
  }
  FAIL("expected DetectionError");
  return DetectionError::Kind::IoError;
}

BoundingBox hand(double x, double y, double w, double h) { return {x, y, w, h, BoxClass::Hand, {}}; }

FrameRecord sample_record() {
  FrameRecord r;
  r.episode_id = "ep0007";
  r.frame_idx = 3;
  r.image_path = "images/ep0007_003.ppm";
  r.action_id = 4;
  r.grasp_id = 12;
  r.object_id = 2;
  r.mesh_path = "meshes/ep0007_003.off";
  r.hand_right = BoundingBox{0.5, 0.25, 0.375, 0.5, BoxClass::Hand, Side::Right};
  r.object = BoundingBox{0.0625, 0.3, 0.3, 0.4, BoxClass::Object, std::nullopt};
  return r;
}

Image random_image(int w, int h, int c, Rng& rng) {
  Image img(w, h, c);
  for (double& v : img.data) v = rng.uniform();
  return img;
}

}  // namespace

TEST_CASE("oracle detection returns manifest boxes") {
  Rng rng(1);
  const FrameRecord r = sample_record();
  const DetectionResult d = oracle_detect(r, 0.0, rng);
  REQUIRE(d.hands.size() == 1);
  CHECK(d.hands[0] == *r.hand_right);
  CHECK(d.object == r.object);

  for (int trial = 0; trial < 2000; ++trial) {
    FrameRecord edge = r;
    edge.hand_right = BoundingBox{0.97, 0.0, 0.03, 1.0, BoxClass::Hand, Side::Right};
    const auto source = trial % 2 ? r : edge;
    const DetectionResult j = oracle_detect(source, 0.05, rng);
    const BoundingBox& a = *source.hand_right;
    const BoundingBox& b = j.hands[0];
    CHECK_NOTHROW(validate_box(b));
    CHECK(std::abs(a.x - b.x) <= 0.05);
    CHECK(std::abs(a.y - b.y) <= 0.05);
    CHECK(std::abs(a.w - b.w) <= 0.05);
    CHECK(std::abs(a.h - b.h) <= 0.05);
    CHECK_NOTHROW(validate_box(*j.object));
  }

  FrameRecord empty = r;
  empty.hand_right.reset();
  empty.object.reset();
  CHECK(error_kind_of([&] { oracle_detect(empty, 0.0, rng); }) ==
        DetectionError::Kind::MissingAnnotation);
}

TEST_CASE("primary hand is the rightmost") {
  DetectionResult d;
  CHECK(error_kind_of([&] { resolve_primary_hand(d); }) == DetectionError::Kind::NoHandDetected);

  d.hands = {hand(0.2, 0.1, 0.2, 0.2)};
  CHECK(resolve_primary_hand(d) == d.hands[0]);

  // centres 0.3 and 0.7
  d.hands = {hand(0.2, 0.1, 0.2, 0.2), hand(0.6, 0.4, 0.2, 0.3)};
  CHECK(resolve_primary_hand(d).center_x() == doctest::Approx(0.7));
  std::reverse(d.hands.begin(), d.hands.end());
  CHECK(resolve_primary_hand(d).center_x() == doctest::Approx(0.7));

  // Equal centres: the result must not depend on order either.
  d.hands = {hand(0.4, 0.1, 0.2, 0.2), hand(0.45, 0.5, 0.1, 0.3)};
  const BoundingBox first = resolve_primary_hand(d);
  std::reverse(d.hands.begin(), d.hands.end());
  CHECK(resolve_primary_hand(d) == first);
}

TEST_CASE("crop and resize") {
  Rng rng(2);
  const Image img = random_image(12, 10, 3, rng);
  CHECK(crop_and_resize(img, hand(0, 0, 1, 1), 12).data.size() == 12 * 12 * 3);

  Image square = random_image(16, 16, 3, rng);
  CHECK(crop_and_resize(square, hand(0, 0, 1, 1), 16) == square);

  Image flat(20, 20, 3, 0.0);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 20; ++x) {
      flat.at(x, y, 0) = 0.2;
      flat.at(x, y, 1) = 0.5;
      flat.at(x, y, 2) = 0.9;
    }
  }
  const Image patch = crop_and_resize(flat, hand(0.1, 0.3, 0.45, 0.6), 7);
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 7; ++x) {
      CHECK(patch.at(x, y, 0) == doctest::Approx(0.2).epsilon(1e-15));
      CHECK(patch.at(x, y, 2) == doctest::Approx(0.9).epsilon(1e-15));
    }
  }

  // 2x2 checker to 4x4: sample coordinates are -0.25, 0.25, 0.75, 1.25 per
  // axis, clamped to [0, 1], so the weights of the right/bottom pixel are
  // 0, 0.25, 0.75, 1.
  Image checker(2, 2, 1);
  checker.at(0, 0, 0) = 1.0;
  checker.at(1, 1, 0) = 1.0;
  const Image up = crop_and_resize(checker, hand(0, 0, 1, 1), 4);
  const double t[4] = {0.0, 0.25, 0.75, 1.0};
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      const double expected = (1 - t[x]) * (1 - t[y]) * 1.0 + t[x] * t[y] * 1.0;
      CHECK(up.at(x, y, 0) == doctest::Approx(expected).epsilon(1e-15));
    }
  }
}

TEST_CASE("cropping commutes with horizontal mirroring") {
  Rng rng(3);
  const Image img = random_image(32, 32, 3, rng);
  const Image mirrored = flip_horizontal(img);
  // Dyadic boxes mirror exactly, so the comparison is bitwise.
  for (const BoundingBox& box : {hand(0.125, 0.25, 0.5, 0.5), hand(0.0, 0.0, 1.0, 1.0),
                                 hand(0.40625, 0.1875, 0.28125, 0.5625)}) {
    const BoundingBox mbox = hand(1.0 - box.x - box.w, box.y, box.w, box.h);
    for (int size : {8, 13, 32}) {
      CHECK(crop_and_resize(mirrored, mbox, size) == flip_horizontal(crop_and_resize(img, box, size)));
    }
  }
  for (int trial = 0; trial < 200; ++trial) {
    const double x = static_cast<double>(rng.below(60)) / 64;
    const double y = static_cast<double>(rng.below(60)) / 64;
    const double w = static_cast<double>(1 + rng.below(64 - static_cast<int>(x * 64))) / 64;
    const double h = static_cast<double>(1 + rng.below(64 - static_cast<int>(y * 64))) / 64;
    const int size = 3 + static_cast<int>(rng.below(30));
    const BoundingBox box = hand(x, y, w, h);
    const BoundingBox mbox = hand(1.0 - x - w, y, w, h);
    CHECK(crop_and_resize(mirrored, mbox, size) == flip_horizontal(crop_and_resize(img, box, size)));
  }
}

TEST_CASE("global feature") {
  Rng rng(4);
  const Image img = random_image(32, 32, 3, rng);
  DetectionResult d;
  d.hands = {hand(0.5, 0.25, 0.25, 0.5), hand(0.05, 0.3, 0.2, 0.2)};
  d.object = BoundingBox{0.25, 0.5, 0.2, 0.2, BoxClass::Object, {}};

  const auto f = global_feature(img, d);
  CHECK(f.size() == static_cast<std::size_t>(kGlobalFeatureWidth));
  CHECK(f == global_feature(img, d));

  // Thumbnail cell (1, 2) is the mean luma of pixels x 4..7, y 8..11.
  double sum = 0.0;
  for (int y = 8; y < 12; ++y) {
    for (int x = 4; x < 8; ++x) {
      sum += 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
    }
  }
  CHECK(f[2 * 8 + 1] == doctest::Approx(sum / 16).epsilon(1e-14));

  const std::size_t box0 = 64;
  CHECK(f[box0 + 0] == doctest::Approx(0.625));
  CHECK(f[box0 + 1] == doctest::Approx(0.5));
  CHECK(f[box0 + 4] == 1.0);
  CHECK(f[box0 + 5] == doctest::Approx(0.15));
  CHECK(f[box0 + 14] == 1.0);

  DetectionResult no_object = d;
  no_object.object.reset();
  const auto g = global_feature(img, no_object);
  for (int i = 0; i < 5; ++i) CHECK(g[box0 + 10 + i] == 0.0);
  CHECK(std::equal(g.begin(), g.begin() + 74, f.begin()));

  // Translate scene content and boxes by 8 pixels (one grid cell) to the left.
  Image shifted(32, 32, 3, 0.0);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 24; ++x) {
      for (int c = 0; c < 3; ++c) shifted.at(x, y, c) = img.at(x + 8, y, c);
    }
  }
  DetectionResult moved = d;
  for (auto& h : moved.hands) h.x -= 0.25;
  moved.object->x -= 0.25;
  moved.hands[1].x = 0.0;  // clamp at the border, width kept
  const auto m = global_feature(shifted, moved);
  for (int gy = 0; gy < 8; ++gy) {
    for (int gx = 0; gx < 6; ++gx) CHECK(m[gy * 8 + gx] == doctest::Approx(f[gy * 8 + gx + 2]));
    CHECK(m[gy * 8 + 7] == 0.0);
  }
  CHECK(m[box0 + 0] == doctest::Approx(f[box0 + 0] - 0.25));
  CHECK(m[box0 + 10] == doctest::Approx(f[box0 + 10] - 0.25));
  CHECK(m[box0 + 1] == f[box0 + 1]);
}

TEST_CASE("manifest round trip and errors") {
  FrameRecord a = sample_record();
  FrameRecord b = a;
  b.frame_idx = 4;
  b.hand_left = BoundingBox{0.0, 0.5, 0.1 + 0.2, 0.25, BoxClass::Hand, Side::Left};
  b.object.reset();
  const std::vector<FrameRecord> frames = {a, b};
  const std::string text = format_manifest(frames);
  CHECK(parse_manifest(text) == frames);

  CHECK(error_kind_of([] { parse_manifest("ep 0 img 1 2 3 mesh - -\n"); }) ==
        DetectionError::Kind::ParseError);
  CHECK(error_kind_of([] { parse_manifest("ep 0 img 1 2 3 mesh 0.5,0.5,0.6,0.1 - -\n"); }) ==
        DetectionError::Kind::ParseError);
  CHECK(error_kind_of([] { parse_manifest("ep x img 1 2 3 mesh - - -\n"); }) ==
        DetectionError::Kind::ParseError);
  CHECK(error_kind_of([] { validate_box(hand(0.1, 0.1, 0.0, 0.5)); }) ==
        DetectionError::Kind::InvalidBox);
}

TEST_CASE("pnm round trip") {
  Rng rng(5);
  for (int channels : {1, 3}) {
    Image img(7, 5, channels);
    for (double& v : img.data) v = static_cast<double>(rng.below(256)) * (1.0 / 255);
    const Image back = parse_pnm(encode_pnm(img));
    CHECK(back == img);
  }
  const Image ascii = parse_pnm("P2\n# comment\n2 1\n10\n0 10\n");
  CHECK(ascii.data == std::vector<double>{0.0, 1.0});
  CHECK(error_kind_of([] { parse_pnm("P6\n4 4\n255\nxx"); }) == DetectionError::Kind::ParseError);
  CHECK(error_kind_of([] { parse_pnm("P7\n"); }) == DetectionError::Kind::ParseError);

  const auto path = std::filesystem::temp_directory_path() / "handact_test_image.ppm";
  Image img(3, 2, 3, 0.5);
  write_pnm(path, img);
  CHECK(read_pnm(path).width == 3);
  std::filesystem::remove(path);
}
