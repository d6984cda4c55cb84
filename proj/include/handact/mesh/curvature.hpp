// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "handact/mesh/mesh.hpp"

namespace handact::mesh {

enum class CurvatureKind { Mean, Gaussian, Maximum, Minimum };

std::string_view to_string(CurvatureKind kind);
/// Accepts "mean", "gaussian", "max"/"maximum", "min"/"minimum".
std::optional<CurvatureKind> parse_curvature_kind(std::string_view name);

/// Per-vertex scalar field. Boundary entries are flagged in boundary_mask and
/// are excluded from regression losses.
struct CurvatureField {
  CurvatureKind kind = CurvatureKind::Mean;
  std::vector<double> values;
  std::vector<char> boundary_mask;

  std::size_t size() const { return values.size(); }
};

/// cot clamping range used by every cotangent evaluation.
inline constexpr double kCotClamp = 1e4;
/// Mixed areas below this raise DegenerateArea.
inline constexpr double kMinVertexArea = 1e-12;

/// Mixed Voronoi area per vertex. A triangle with an obtuse angle gives half
/// its area to the obtuse corner and a quarter to each of the others, which
/// agrees with the Voronoi split at exactly right angles.
std::vector<double> mixed_areas(const TriangleMesh& mesh, const VertexAdjacency& adj);

/// Area-weighted vertex normals (unit length, zero if undefined).
std::vector<Vec3> vertex_normals(const TriangleMesh& mesh, const VertexAdjacency& adj);

/// 2*pi minus the incident angle sum for interior vertices, pi minus the sum
/// on the boundary. Summed over the mesh this equals 2*pi*chi.
std::vector<double> angle_defects(const TriangleMesh& mesh, const VertexAdjacency& adj);

/// Cotangent-Laplacian mean curvature, positive on spheres with outward
/// normals. Boundary vertices are 0 and masked.
CurvatureField mean_curvature(const TriangleMesh& mesh, const VertexAdjacency& adj);

/// Angle defect over mixed area.
CurvatureField gaussian_curvature(const TriangleMesh& mesh, const VertexAdjacency& adj);

/// k = H +- sqrt(max(H^2 - K, 0)); returns {max, min}.
std::pair<CurvatureField, CurvatureField> principal_curvatures(const TriangleMesh& mesh,
                                                               const VertexAdjacency& adj);

CurvatureField compute_curvature(const TriangleMesh& mesh, const VertexAdjacency& adj,
                                 CurvatureKind kind);

/// Columns: vertex_id,kind,value,boundary_flag
void write_curvature_csv(std::ostream& out, const CurvatureField& field);

}  // namespace handact::mesh
