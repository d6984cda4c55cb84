// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "handact/mesh/mesh.hpp"

namespace handact::synth {

/// Subdivided icosahedron projected to a sphere; level 3 has 642 vertices.
mesh::TriangleMesh make_icosphere(int subdivisions, double radius = 1.0);

/// Planar (z = 0) grid of nx by ny vertices, each quad split in two. Interior
/// vertices may be jittered inside the plane by up to `jitter` * spacing.
mesh::TriangleMesh make_grid(int nx, int ny, double spacing = 1.0, double jitter = 0.0,
                             std::uint64_t seed = 0);

/// Open tube along +z made of n_rings rings of n_around vertices.
mesh::TriangleMesh make_cylinder(double radius, double height, int n_around, int n_rings);

mesh::TriangleMesh make_octahedron();
mesh::TriangleMesh make_single_triangle();

// Hand stand-in: a tube open at the wrist (z = 0) and closed by a rounded tip,
// with the MANO vertex/face counts (778 / 1538, 16 boundary vertices).
inline constexpr int kHandRingSize = 16;
inline constexpr int kHandRings = 48;
inline constexpr int kHandVertices = 778;
inline constexpr int kHandFaces = 1538;
inline constexpr double kHandRadius = 0.5;
inline constexpr double kHandLength = 3.0;

struct HandTemplate {
  mesh::TriangleMesh mesh;
  /// Rest-pose cylindrical coordinates per vertex.
  std::vector<double> angle;
  std::vector<double> height;
  std::vector<double> radius;
};

const HandTemplate& hand_template();

/// Shape parameters of one frame's hand surface. All zero is the template.
struct DeformParams {
  double bend = 0.0;        // axis curvature (1 / length) in the x-z plane
  double flatten = 0.0;     // cross-section ellipticity
  double bulge = 0.0;       // relative radius modulation amplitude
  double bulge_cycles = 1;  // half-waves of the bulge along the tube
  double ripple = 0.0;      // relative amplitude of a fine 4-cycle ripple
};

DeformParams lerp(const DeformParams& a, const DeformParams& b, double t);

mesh::TriangleMesh deform_hand(const DeformParams& params);

}  // namespace handact::synth
