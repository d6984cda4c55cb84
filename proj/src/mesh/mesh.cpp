// SPDX-License-Identifier: Apache-2.0
#include "handact/mesh/mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>

namespace handact::mesh {

namespace {

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

void check_indices(const TriangleMesh& mesh) {
  const auto n = static_cast<int>(mesh.vertices.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& t = mesh.faces[f];
    for (int v : t) {
      if (v < 0 || v >= n) {
        throw MeshError(MeshError::Kind::InvalidIndex,
                        "face " + std::to_string(f) + " references vertex " + std::to_string(v) +
                            " but the mesh has " + std::to_string(n) + " vertices");
      }
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw MeshError(MeshError::Kind::InvariantViolation,
                      "face " + std::to_string(f) + " repeats a vertex");
    }
  }
}

// Maps each directed edge a->b to the face that contains it.
std::unordered_map<std::uint64_t, int> directed_edges(const TriangleMesh& mesh) {
  std::unordered_map<std::uint64_t, int> half;
  half.reserve(mesh.faces.size() * 3);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& t = mesh.faces[f];
    for (int c = 0; c < 3; ++c) {
      const int a = t[c];
      const int b = t[(c + 1) % 3];
      auto [it, inserted] = half.emplace(edge_key(a, b), static_cast<int>(f));
      if (!inserted) {
        // Same directed edge twice: either a third face on this edge or two
        // faces with clashing orientation. Tell them apart by the reverse.
        const bool has_reverse = half.count(edge_key(b, a)) != 0;
        if (has_reverse) {
          throw MeshError(MeshError::Kind::NonManifoldEdge,
                          "edge (" + std::to_string(a) + "," + std::to_string(b) +
                              ") is shared by more than two faces");
        }
        throw MeshError(MeshError::Kind::InvariantViolation,
                        "faces " + std::to_string(it->second) + " and " + std::to_string(f) +
                            " have inconsistent orientation on edge (" + std::to_string(a) +
                            "," + std::to_string(b) + ")");
      }
    }
  }
  return half;
}

}  // namespace

double face_area(const TriangleMesh& mesh, std::size_t f) {
  const Face& t = mesh.faces[f];
  const Vec3& a = mesh.vertices[t[0]];
  const Vec3& b = mesh.vertices[t[1]];
  const Vec3& c = mesh.vertices[t[2]];
  return 0.5 * (b - a).cross(c - a).norm();
}

void validate(const TriangleMesh& mesh) {
  check_indices(mesh);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (!(face_area(mesh, f) > kMinFaceArea)) {
      throw MeshError(MeshError::Kind::InvariantViolation,
                      "face " + std::to_string(f) + " has zero area");
    }
  }
  for (const Vec3& v : mesh.vertices) {
    if (!v.allFinite()) {
      throw MeshError(MeshError::Kind::InvariantViolation, "vertex position is not finite");
    }
  }
  directed_edges(mesh);
}

std::size_t count_edges(const TriangleMesh& mesh) {
  std::unordered_map<std::uint64_t, int> seen;
  seen.reserve(mesh.faces.size() * 3);
  for (const Face& t : mesh.faces) {
    for (int c = 0; c < 3; ++c) {
      const int a = std::min(t[c], t[(c + 1) % 3]);
      const int b = std::max(t[c], t[(c + 1) % 3]);
      seen.emplace(edge_key(a, b), 0);
    }
  }
  return seen.size();
}

int euler_characteristic(const TriangleMesh& mesh) {
  return static_cast<int>(mesh.vertices.size()) - static_cast<int>(count_edges(mesh)) +
         static_cast<int>(mesh.faces.size());
}

TriangleMesh transformed(const TriangleMesh& mesh, const Eigen::Matrix3d& rotation,
                         const Vec3& translation, double scale) {
  TriangleMesh out = mesh;
  for (Vec3& v : out.vertices) v = scale * (rotation * v) + translation;
  return out;
}

VertexAdjacency build_adjacency(const TriangleMesh& mesh) {
  check_indices(mesh);
  directed_edges(mesh);

  const std::size_t n = mesh.vertices.size();
  VertexAdjacency adj;
  adj.rings.resize(n);
  adj.incident_faces.resize(n);
  adj.boundary.assign(n, 0);

  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    for (int v : mesh.faces[f]) adj.incident_faces[v].push_back(static_cast<int>(f));
  }

  // Each incident face (v, j, k) is a wedge j -> k around v.
  for (std::size_t v = 0; v < n; ++v) {
    const auto& faces = adj.incident_faces[v];
    if (faces.empty()) continue;

    std::unordered_map<int, int> next;
    std::unordered_map<int, int> prev;
    next.reserve(faces.size());
    prev.reserve(faces.size());
    for (int f : faces) {
      const Face& t = mesh.faces[f];
      const int c = t[0] == static_cast<int>(v) ? 0 : (t[1] == static_cast<int>(v) ? 1 : 2);
      const int j = t[(c + 1) % 3];
      const int k = t[(c + 2) % 3];
      next[j] = k;
      prev[k] = j;
    }

    // Open fans start at a neighbour nobody points to.
    int start = -1;
    for (int f : faces) {
      const Face& t = mesh.faces[f];
      const int c = t[0] == static_cast<int>(v) ? 0 : (t[1] == static_cast<int>(v) ? 1 : 2);
      const int j = t[(c + 1) % 3];
      if (prev.count(j) == 0) {
        if (start != -1) {
          throw MeshError(MeshError::Kind::NonManifoldVertex,
                          "vertex " + std::to_string(v) + " has more than one face fan");
        }
        start = j;
      }
    }

    auto& ring = adj.rings[v];
    if (start == -1) {
      // Closed fan: start at the smallest neighbour for a canonical order.
      start = next.begin()->first;
      for (const auto& [j, k] : next) start = std::min(start, j);
      int cur = start;
      do {
        ring.push_back(cur);
        cur = next.at(cur);
      } while (cur != start && ring.size() <= faces.size());
    } else {
      adj.boundary[v] = 1;
      int cur = start;
      ring.push_back(cur);
      while (next.count(cur) != 0 && ring.size() <= faces.size()) {
        cur = next.at(cur);
        ring.push_back(cur);
      }
    }

    const std::size_t expected = faces.size() + (adj.boundary[v] ? 1 : 0);
    if (ring.size() != expected) {
      throw MeshError(MeshError::Kind::NonManifoldVertex,
                      "vertex " + std::to_string(v) + " has a non-disk neighbourhood");
    }
  }
  return adj;
}

}  // namespace handact::mesh
