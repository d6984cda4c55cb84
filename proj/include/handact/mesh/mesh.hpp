// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace handact::mesh {

using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Faces smaller than this are treated as degenerate.
inline constexpr double kMinFaceArea = 1e-12;

class MeshError : public std::runtime_error {
 public:
  enum class Kind {
    InvalidIndex,
    NonManifoldEdge,
    NonManifoldVertex,
    DegenerateArea,
    ParseError,
    InvariantViolation,
    IoError,
  };

  MeshError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Indexed triangle mesh. Faces are counter-clockwise when seen from the
/// side the surface normal points to.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_faces() const { return faces.size(); }
};

/// Throws MeshError (InvalidIndex, NonManifoldEdge or InvariantViolation) if
/// the mesh breaks an invariant: index range, repeated face vertex, zero-area
/// face, an edge used by more than two faces or two faces that disagree on
/// orientation.
void validate(const TriangleMesh& mesh);

double face_area(const TriangleMesh& mesh, std::size_t f);

/// Number of undirected edges.
std::size_t count_edges(const TriangleMesh& mesh);

/// V - E + F.
int euler_characteristic(const TriangleMesh& mesh);

/// Applies x -> s * R x + t to every vertex.
TriangleMesh transformed(const TriangleMesh& mesh, const Eigen::Matrix3d& rotation,
                         const Vec3& translation, double scale = 1.0);

// One-ring connectivity per vertex.
//
// rings[i] lists neighbours in counter-clockwise order. For an interior vertex
// the ring is closed: the successor of the last entry is the first one, and
// each neighbour appears once. For a boundary vertex the ring is an open fan
// that starts and ends on boundary edges, so it has one more entry than the
// vertex has incident faces.
struct VertexAdjacency {
  std::vector<std::vector<int>> rings;
  std::vector<std::vector<int>> incident_faces;
  std::vector<char> boundary;

  bool is_boundary(std::size_t v) const { return boundary[v] != 0; }
};

VertexAdjacency build_adjacency(const TriangleMesh& mesh);

}  // namespace handact::mesh
