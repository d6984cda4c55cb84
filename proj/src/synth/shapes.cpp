// SPDX-License-Identifier: Apache-2.0
#include "handact/synth/shapes.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <utility>

namespace handact::synth {

using mesh::Face;
using mesh::TriangleMesh;
using mesh::Vec3;

namespace {

constexpr double kPi = std::numbers::pi;

// Appends the strip between two rings; both are ordered by increasing angle
// and the second ring sits above the first. Faces point away from the axis.
void zip_rings(const std::vector<int>& lower, const std::vector<int>& upper,
               std::vector<Face>& faces) {
  const std::size_t m = lower.size();
  const std::size_t n = upper.size();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < m || j < n) {
    // Advance whichever ring's next vertex comes first in angle.
    const bool advance_lower =
        j == n || (i < m && static_cast<double>(i + 1) / m <= static_cast<double>(j + 1) / n);
    if (advance_lower) {
      faces.push_back({lower[i % m], lower[(i + 1) % m], upper[j % n]});
      ++i;
    } else {
      faces.push_back({lower[i % m], upper[(j + 1) % n], upper[j % n]});
      ++j;
    }
  }
}

HandTemplate build_hand_template() {
  HandTemplate t;
  auto add = [&](double theta, double z, double rho) {
    t.mesh.vertices.emplace_back(rho * std::cos(theta), rho * std::sin(theta), z);
    t.angle.push_back(theta);
    t.height.push_back(z);
    t.radius.push_back(rho);
    return static_cast<int>(t.mesh.vertices.size()) - 1;
  };

  std::vector<std::vector<int>> rings;
  for (int k = 0; k < kHandRings; ++k) {
    const double z = kHandLength * k / (kHandRings - 1);
    std::vector<int> ring;
    for (int j = 0; j < kHandRingSize; ++j) {
      ring.push_back(add(2.0 * kPi * j / kHandRingSize, z, kHandRadius));
    }
    rings.push_back(std::move(ring));
  }
  // Tip: a 9-vertex ring at 45 degrees latitude and a pole.
  constexpr int kCapRing = 9;
  const double lat = kPi / 4.0;
  std::vector<int> cap;
  for (int j = 0; j < kCapRing; ++j) {
    cap.push_back(add(2.0 * kPi * j / kCapRing, kHandLength + kHandRadius * std::sin(lat),
                      kHandRadius * std::cos(lat)));
  }
  const int pole = add(0.0, kHandLength + kHandRadius, 0.0);

  for (int k = 0; k + 1 < kHandRings; ++k) zip_rings(rings[k], rings[k + 1], t.mesh.faces);
  zip_rings(rings.back(), cap, t.mesh.faces);
  for (int j = 0; j < kCapRing; ++j) t.mesh.faces.push_back({cap[j], cap[(j + 1) % kCapRing], pole});
  return t;
}

}  // namespace

TriangleMesh make_icosphere(int subdivisions, double radius) {
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh m;
  m.vertices = {{-1, p, 0}, {1, p, 0},  {-1, -p, 0}, {1, -p, 0}, {0, -1, p},  {0, 1, p},
                {0, -1, -p}, {0, 1, -p}, {p, 0, -1},  {p, 0, 1},  {-p, 0, -1}, {-p, 0, 1}};
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (Vec3& v : m.vertices) v.normalize();

  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
      const int id = static_cast<int>(m.vertices.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Face> next;
    next.reserve(m.faces.size() * 4);
    for (const Face& f : m.faces) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    m.faces = std::move(next);
  }
  for (Vec3& v : m.vertices) v *= radius;
  return m;
}

TriangleMesh make_grid(int nx, int ny, double spacing, double jitter, std::uint64_t seed) {
  TriangleMesh m;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-jitter, jitter);
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      const bool interior = x > 0 && y > 0 && x + 1 < nx && y + 1 < ny;
      const double dx = interior && jitter > 0.0 ? u(rng) : 0.0;
      const double dy = interior && jitter > 0.0 ? u(rng) : 0.0;
      m.vertices.emplace_back((x + dx) * spacing, (y + dy) * spacing, 0.0);
    }
  }
  for (int y = 0; y + 1 < ny; ++y) {
    for (int x = 0; x + 1 < nx; ++x) {
      const int a = y * nx + x;
      const int b = a + 1;
      const int c = a + nx + 1;
      const int d = a + nx;
      m.faces.push_back({a, b, c});
      m.faces.push_back({a, c, d});
    }
  }
  return m;
}

TriangleMesh make_cylinder(double radius, double height, int n_around, int n_rings) {
  TriangleMesh m;
  std::vector<std::vector<int>> rings;
  for (int k = 0; k < n_rings; ++k) {
    std::vector<int> ring;
    const double z = height * k / (n_rings - 1);
    for (int j = 0; j < n_around; ++j) {
      const double theta = 2.0 * kPi * j / n_around;
      m.vertices.emplace_back(radius * std::cos(theta), radius * std::sin(theta), z);
      ring.push_back(static_cast<int>(m.vertices.size()) - 1);
    }
    rings.push_back(std::move(ring));
  }
  for (int k = 0; k + 1 < n_rings; ++k) zip_rings(rings[k], rings[k + 1], m.faces);
  return m;
}

TriangleMesh make_octahedron() {
  TriangleMesh m;
  m.vertices = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  m.faces = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
             {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
  return m;
}

TriangleMesh make_single_triangle() {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.faces = {{0, 1, 2}};
  return m;
}

const HandTemplate& hand_template() {
  static const HandTemplate t = build_hand_template();
  return t;
}

DeformParams lerp(const DeformParams& a, const DeformParams& b, double t) {
  auto mix = [t](double x, double y) { return x + (y - x) * t; };
  return {mix(a.bend, b.bend), mix(a.flatten, b.flatten), mix(a.bulge, b.bulge),
          mix(a.bulge_cycles, b.bulge_cycles), mix(a.ripple, b.ripple)};
}

TriangleMesh deform_hand(const DeformParams& p) {
  const HandTemplate& t = hand_template();
  TriangleMesh out = t.mesh;
  for (std::size_t v = 0; v < out.vertices.size(); ++v) {
    const double z = t.height[v];
    const double zc = std::min(z, kHandLength) / kHandLength;
    const double scale = 1.0 + p.bulge * std::sin(kPi * p.bulge_cycles * zc) +
                         p.ripple * std::sin(2.0 * kPi * 4.0 * zc);
    const double rho = t.radius[v] * scale;
    double x = rho * std::cos(t.angle[v]) * (1.0 + p.flatten);
    const double y = rho * std::sin(t.angle[v]) * (1.0 - p.flatten);
    double zz = z;
    if (p.bend != 0.0) {
      const double r = 1.0 / p.bend;
      const double phi = p.bend * z;
      const double arm = r - x;
      x = r - arm * std::cos(phi);
      zz = arm * std::sin(phi);
    }
    out.vertices[v] = Vec3(x, y, zz);
  }
  return out;
}

}  // namespace handact::synth
