// SPDX-License-Identifier: Apache-2.0
#include "handact/mesh/curvature.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

namespace handact::mesh {

namespace {

// Corner of face f at vertex v: the other two vertices in CCW order.
struct Corner {
  int j;
  int k;
};

Corner corner_of(const Face& t, int v) {
  const int c = t[0] == v ? 0 : (t[1] == v ? 1 : 2);
  return {t[(c + 1) % 3], t[(c + 2) % 3]};
}

double cot_at(const Vec3& apex, const Vec3& a, const Vec3& b) {
  const Vec3 u = a - apex;
  const Vec3 w = b - apex;
  const double s = u.cross(w).norm();
  const double c = u.dot(w);
  if (s == 0.0) return c >= 0.0 ? kCotClamp : -kCotClamp;
  return std::clamp(c / s, -kCotClamp, kCotClamp);
}

double angle_at(const Vec3& apex, const Vec3& a, const Vec3& b) {
  const Vec3 u = a - apex;
  const Vec3 w = b - apex;
  return std::atan2(u.cross(w).norm(), u.dot(w));
}

void require_area(double area, std::size_t v) {
  if (!(area >= kMinVertexArea)) {
    throw MeshError(MeshError::Kind::DegenerateArea,
                    "vertex " + std::to_string(v) + " has mixed area below 1e-12");
  }
}

CurvatureField empty_field(CurvatureKind kind, const VertexAdjacency& adj) {
  CurvatureField field;
  field.kind = kind;
  field.values.assign(adj.rings.size(), 0.0);
  field.boundary_mask = adj.boundary;
  return field;
}

}  // namespace

std::string_view to_string(CurvatureKind kind) {
  switch (kind) {
    case CurvatureKind::Mean:
      return "mean";
    case CurvatureKind::Gaussian:
      return "gaussian";
    case CurvatureKind::Maximum:
      return "max";
    case CurvatureKind::Minimum:
      return "min";
  }
  return "unknown";
}

std::optional<CurvatureKind> parse_curvature_kind(std::string_view name) {
  if (name == "mean") return CurvatureKind::Mean;
  if (name == "gaussian") return CurvatureKind::Gaussian;
  if (name == "max" || name == "maximum") return CurvatureKind::Maximum;
  if (name == "min" || name == "minimum") return CurvatureKind::Minimum;
  return std::nullopt;
}

std::vector<double> mixed_areas(const TriangleMesh& mesh, const VertexAdjacency& adj) {
  constexpr double kRight = std::numbers::pi / 2.0;
  std::vector<double> area(mesh.vertices.size(), 0.0);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const Vec3& xi = mesh.vertices[v];
    double sum = 0.0;
    for (int f : adj.incident_faces[v]) {
      const auto [j, k] = corner_of(mesh.faces[f], static_cast<int>(v));
      const Vec3& xj = mesh.vertices[j];
      const Vec3& xk = mesh.vertices[k];
      const double ai = angle_at(xi, xj, xk);
      const double aj = angle_at(xj, xk, xi);
      const double ak = angle_at(xk, xi, xj);
      if (ai > kRight) {
        sum += face_area(mesh, static_cast<std::size_t>(f)) / 2.0;
      } else if (aj > kRight || ak > kRight) {
        sum += face_area(mesh, static_cast<std::size_t>(f)) / 4.0;
      } else {
        sum += ((xi - xk).squaredNorm() * cot_at(xj, xk, xi) +
                (xi - xj).squaredNorm() * cot_at(xk, xi, xj)) /
               8.0;
      }
    }
    area[v] = sum;
  }
  return area;
}

std::vector<Vec3> vertex_normals(const TriangleMesh& mesh, const VertexAdjacency& adj) {
  std::vector<Vec3> normals(mesh.vertices.size(), Vec3::Zero());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    Vec3 n = Vec3::Zero();
    for (int f : adj.incident_faces[v]) {
      const Face& t = mesh.faces[f];
      // Cross product length is twice the area: area weighting for free.
      n += (mesh.vertices[t[1]] - mesh.vertices[t[0]])
               .cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]);
    }
    const double len = n.norm();
    if (len > 0.0) normals[v] = n / len;
  }
  return normals;
}

std::vector<double> angle_defects(const TriangleMesh& mesh, const VertexAdjacency& adj) {
  std::vector<double> defect(mesh.vertices.size(), 0.0);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    double sum = 0.0;
    for (int f : adj.incident_faces[v]) {
      const auto [j, k] = corner_of(mesh.faces[f], static_cast<int>(v));
      sum += angle_at(mesh.vertices[v], mesh.vertices[j], mesh.vertices[k]);
    }
    const double full = adj.is_boundary(v) ? std::numbers::pi : 2.0 * std::numbers::pi;
    defect[v] = full - sum;
  }
  return defect;
}

CurvatureField mean_curvature(const TriangleMesh& mesh, const VertexAdjacency& adj) {
  CurvatureField field = empty_field(CurvatureKind::Mean, adj);
  const std::vector<double> area = mixed_areas(mesh, adj);
  const std::vector<Vec3> normals = vertex_normals(mesh, adj);

  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (adj.is_boundary(v) || adj.incident_faces[v].empty()) continue;
    require_area(area[v], v);
    const Vec3& xi = mesh.vertices[v];
    Vec3 lap = Vec3::Zero();
    for (int f : adj.incident_faces[v]) {
      const auto [j, k] = corner_of(mesh.faces[f], static_cast<int>(v));
      const Vec3& xj = mesh.vertices[j];
      const Vec3& xk = mesh.vertices[k];
      // Edge (i,j) is opposite the corner at k, edge (i,k) opposite j.
      lap += cot_at(xk, xi, xj) * (xj - xi);
      lap += cot_at(xj, xk, xi) * (xk - xi);
    }
    lap /= 2.0 * area[v];
    const double magnitude = 0.5 * lap.norm();
    const double along_normal = lap.dot(normals[v]);
    field.values[v] = along_normal > 0.0 ? -magnitude : magnitude;
  }
  return field;
}

CurvatureField gaussian_curvature(const TriangleMesh& mesh, const VertexAdjacency& adj) {
  CurvatureField field = empty_field(CurvatureKind::Gaussian, adj);
  const std::vector<double> area = mixed_areas(mesh, adj);
  const std::vector<double> defect = angle_defects(mesh, adj);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (adj.incident_faces[v].empty()) continue;
    require_area(area[v], v);
    field.values[v] = defect[v] / area[v];
  }
  return field;
}

std::pair<CurvatureField, CurvatureField> principal_curvatures(const TriangleMesh& mesh,
                                                               const VertexAdjacency& adj) {
  const CurvatureField h = mean_curvature(mesh, adj);
  const CurvatureField k = gaussian_curvature(mesh, adj);
  CurvatureField kmax = empty_field(CurvatureKind::Maximum, adj);
  CurvatureField kmin = empty_field(CurvatureKind::Minimum, adj);
  for (std::size_t v = 0; v < h.size(); ++v) {
    const double hv = h.values[v];
    const double root = std::sqrt(std::max(hv * hv - k.values[v], 0.0));
    kmax.values[v] = hv + root;
    kmin.values[v] = hv - root;
  }
  return {std::move(kmax), std::move(kmin)};
}

CurvatureField compute_curvature(const TriangleMesh& mesh, const VertexAdjacency& adj,
                                 CurvatureKind kind) {
  switch (kind) {
    case CurvatureKind::Mean:
      return mean_curvature(mesh, adj);
    case CurvatureKind::Gaussian:
      return gaussian_curvature(mesh, adj);
    case CurvatureKind::Maximum:
      return principal_curvatures(mesh, adj).first;
    case CurvatureKind::Minimum:
      return principal_curvatures(mesh, adj).second;
  }
  return mean_curvature(mesh, adj);
}

void write_curvature_csv(std::ostream& out, const CurvatureField& field) {
  out << "vertex_id,kind,value,boundary_flag\n";
  char buf[64];
  for (std::size_t v = 0; v < field.size(); ++v) {
    auto res = std::to_chars(buf, buf + sizeof(buf), field.values[v]);
    out << v << ',' << to_string(field.kind) << ',' << std::string_view(buf, res.ptr - buf) << ','
        << (field.boundary_mask[v] ? 1 : 0) << '\n';
  }
}

}  // namespace handact::mesh
