#pragma once

#include <array>
#include <string>
#include <vector>

#include "robinlab/common.hpp"
#include "robinlab/geometry.hpp"

namespace robinlab {

// One straight boundary edge of a triangulation. Node order follows the
// counterclockwise boundary loop, so the domain lies to the left and `normal`
// is the outward unit normal of the straight segment. t_i/t_j are the curve
// parameters of the endpoints; on the loop-closing edge t_j is lifted by 2*pi
// so that t_i < t_j holds on every edge.
struct BoundaryEdge {
  int i = -1;
  int j = -1;
  double t_i = 0.0;
  double t_j = 0.0;
  double length = 0.0;
  Vec2 normal{0.0, 0.0};
};

struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise triples
  std::vector<BoundaryEdge> boundary_edges;   // single closed CCW loop
  std::vector<char> on_boundary;              // per-node flag
  double h = 0.0;                             // target element size

  int node_count() const { return static_cast<int>(nodes.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }

  double triangle_area(int t) const;
  double total_area() const;
  double boundary_length() const;
  double min_angle_deg() const;

  // Checks every structural invariant (positive areas, edge manifoldness,
  // single boundary loop, connectivity, minimum angle). Throws MeshError
  // describing the first violation.
  void validate() const;

  // Text dump with NODES / TRIANGLES / BEDGES sections.
  void write_text(const std::string& path) const;
  static Mesh read_text(const std::string& path);
};

// Triangulates the region bounded by `curve`: boundary nodes at arclength
// spacing <= h, hexagonal interior seeding of pitch h (deterministically
// jittered), Delaunay triangulation, exterior removal by centroid test, and
// three Laplacian smoothing passes on interior nodes. Throws MeshError when
// the result violates mesh invariants; the message suggests a smaller h.
Mesh triangulate(const BoundaryCurve& curve, double h);

// Re-triangulates with target size mesh.h/2 inside the union of disks of the
// given radius around `centers` and mesh.h elsewhere. An empty center list
// reproduces the quality of a fresh triangulation at mesh.h.
Mesh refine_near(const Mesh& mesh, const std::vector<Vec2>& centers, double radius,
                 const BoundaryCurve& curve);

// Node -> incident-triangle lists (shared by gradient recovery and smoothing).
std::vector<std::vector<int>> node_triangle_adjacency(const Mesh& mesh);

// Crossing-parity test against the mesh's boundary polygon.
bool point_inside(const Mesh& mesh, Vec2 p);

}  // namespace robinlab
