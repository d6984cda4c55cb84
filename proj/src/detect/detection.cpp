// SPDX-License-Identifier: Apache-2.0
#include "handact/detect/detection.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace handact::detect {

namespace {

constexpr double kMinExtent = 1e-3;

BoundingBox jitter(const BoundingBox& b, double noise, Rng& rng) {
  if (noise <= 0.0) return b;
  BoundingBox out = b;
  const double dx = rng.uniform(-noise, noise);
  const double dy = rng.uniform(-noise, noise);
  const double dw = rng.uniform(-noise, noise);
  const double dh = rng.uniform(-noise, noise);
  out.x = std::clamp(b.x + dx, 0.0, 1.0 - kMinExtent);
  out.y = std::clamp(b.y + dy, 0.0, 1.0 - kMinExtent);
  out.w = std::clamp(b.w + dw, kMinExtent, 1.0 - out.x);
  out.h = std::clamp(b.h + dh, kMinExtent, 1.0 - out.y);
  return out;
}

auto order_key(const BoundingBox& b) { return std::make_tuple(b.center_x(), b.y, b.w, b.h, b.x); }

// Interpolation taps along one axis. Positions are given relative to the
// image centre; positive offsets are resolved by mirroring so that flipping
// image and box together flips the result bit for bit.
struct Taps {
  int i0, i1;
  double f;
};

Taps axis_taps(double u, int extent) {
  const bool mirror = u > 0.0;
  const double half = 0.5 * extent - 0.5;
  const double p = std::clamp((mirror ? -u : u) + half, 0.0, static_cast<double>(extent - 1));
  int i0 = static_cast<int>(std::floor(p));
  int i1 = std::min(i0 + 1, extent - 1);
  const double f = p - i0;
  if (mirror) {
    i0 = extent - 1 - i0;
    i1 = extent - 1 - i1;
  }
  return {i0, i1, f};
}

void put_box(std::vector<double>& out, std::size_t offset, const std::optional<BoundingBox>& b) {
  if (!b) return;
  out[offset + 0] = b->center_x();
  out[offset + 1] = b->center_y();
  out[offset + 2] = b->w;
  out[offset + 3] = b->h;
  out[offset + 4] = 1.0;
}

}  // namespace

DetectionResult oracle_detect(const FrameRecord& frame, double noise, Rng& rng) {
  if (!frame.hand_right && !frame.hand_left && !frame.object) {
    throw DetectionError(DetectionError::Kind::MissingAnnotation,
                         "frame " + std::to_string(frame.frame_idx) + " of episode " +
                             frame.episode_id + " has no boxes");
  }
  DetectionResult d;
  d.image_path = frame.image_path;
  for (const auto& hand : {frame.hand_right, frame.hand_left}) {
    if (hand) d.hands.push_back(jitter(*hand, noise, rng));
  }
  if (frame.object) d.object = jitter(*frame.object, noise, rng);
  return d;
}

BoundingBox resolve_primary_hand(const DetectionResult& d) {
  if (d.hands.empty()) {
    throw DetectionError(DetectionError::Kind::NoHandDetected, "no hand box in " + d.image_path);
  }
  return *std::max_element(d.hands.begin(), d.hands.end(), [](const auto& a, const auto& b) {
    return order_key(a) < order_key(b);
  });
}

Image crop_and_resize(const Image& image, const BoundingBox& box, int size) {
  Image out(size, size, image.channels);
  // Box centre and sample step in pixels, centred on the image.
  const double cx = (box.x + 0.5 * box.w) * image.width - 0.5 * image.width;
  const double cy = (box.y + 0.5 * box.h) * image.height - 0.5 * image.height;
  const double sx = box.w * image.width / size;
  const double sy = box.h * image.height / size;
  std::vector<Taps> xs(size);
  for (int i = 0; i < size; ++i) xs[i] = axis_taps(cx + (i + 0.5 - 0.5 * size) * sx, image.width);
  for (int j = 0; j < size; ++j) {
    const Taps ty = axis_taps(cy + (j + 0.5 - 0.5 * size) * sy, image.height);
    for (int i = 0; i < size; ++i) {
      const Taps& tx = xs[i];
      for (int c = 0; c < image.channels; ++c) {
        const double top = image.at(tx.i0, ty.i0, c) * (1.0 - tx.f) + image.at(tx.i1, ty.i0, c) * tx.f;
        const double bottom = image.at(tx.i0, ty.i1, c) * (1.0 - tx.f) + image.at(tx.i1, ty.i1, c) * tx.f;
        out.at(i, j, c) = top * (1.0 - ty.f) + bottom * ty.f;
      }
    }
  }
  return out;
}

std::vector<double> global_feature(const Image& frame, const DetectionResult& d) {
  std::vector<double> out(kGlobalFeatureWidth, 0.0);
  const Image gray = to_grayscale(frame);
  for (int gy = 0; gy < kGlobalGrid; ++gy) {
    const int ya = gy * gray.height / kGlobalGrid;
    const int yb = std::max(ya + 1, (gy + 1) * gray.height / kGlobalGrid);
    for (int gx = 0; gx < kGlobalGrid; ++gx) {
      const int xa = gx * gray.width / kGlobalGrid;
      const int xb = std::max(xa + 1, (gx + 1) * gray.width / kGlobalGrid);
      double sum = 0.0;
      for (int y = ya; y < yb; ++y) {
        for (int x = xa; x < xb; ++x) sum += gray.at(std::min(x, gray.width - 1), std::min(y, gray.height - 1), 0);
      }
      out[gy * kGlobalGrid + gx] = sum / ((yb - ya) * (xb - xa));
    }
  }
  std::size_t offset = kGlobalGrid * kGlobalGrid;
  std::optional<BoundingBox> primary;
  std::optional<BoundingBox> other;
  if (!d.hands.empty()) {
    primary = resolve_primary_hand(d);
    for (const BoundingBox& h : d.hands) {
      if (!(h == *primary)) other = h;
    }
  }
  put_box(out, offset, primary);
  put_box(out, offset + kBoxSlotWidth, other);
  put_box(out, offset + 2 * kBoxSlotWidth, d.object);
  return out;
}

}  // namespace handact::detect
