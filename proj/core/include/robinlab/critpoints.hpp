#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "robinlab/assembly.hpp"
#include "robinlab/geometry.hpp"
#include "robinlab/mesh.hpp"

namespace robinlab {

// One critical point of the piecewise-linear interpolant, polished by a
// local quadratic fit.
struct CriticalPoint {
  enum class Kind { Max, Min, Saddle, Degenerate };

  Vec2 position{0.0, 0.0};
  double value = 0.0;          // u interpolated at the polished position
  double grad_residual = 0.0;  // |recovered gradient| interpolated there
  std::array<double, 3> hessian{0.0, 0.0, 0.0};  // (h_xx, h_xy, h_yy) of the fit
  Kind kind = Kind::Degenerate;
  int index = 0;  // +1 extremum, -1 saddle, 0 degenerate

  static const char* kind_name(Kind k);
};

// Sign classification of a symmetric 2x2 Hessian. Degenerate when
// |det| < 1e-3 * ((|e1|+|e2|)/2)^2 for eigenvalues e1, e2.
struct Classification {
  CriticalPoint::Kind kind = CriticalPoint::Kind::Degenerate;
  int index = 0;
  double det = 0.0;
  double trace = 0.0;
};
Classification classify_hessian(double hxx, double hxy, double hyy);

// Census of all critical points plus the topological cross-checks: the sum of
// indices and the winding number of the recovered gradient along the node
// layer just inside the boundary (both equal 1 on a simply connected domain
// with an inward-pointing boundary gradient).
struct CritCensus {
  std::vector<CriticalPoint> points;
  int index_sum = 0;
  int boundary_winding = 0;
  double winding_residue = 0.0;  // distance of the raw winding to the integer
  bool hopf_ok = false;          // u > 0 everywhere and boundary flux inward
  bool any_degenerate = false;

  int count(CriticalPoint::Kind k) const;
  // Multiset of kinds, e.g. "max:3 saddle:2"; used for refinement stability.
  std::string signature() const;
};

// Per-node gradient: area-weighted average of the incident triangles'
// constant gradients.
std::vector<Vec2> recover_gradient(const Mesh& mesh, const Field& u);

// Finds critical points: candidate triangles where both recovered-gradient
// components change sign over the triangle's nodes, a least-squares quadratic
// fit on the 2-ring node patch, one Newton polish on the fitted quadratic,
// dedupe within 2h (keeping the smaller gradient residual), and a discard of
// points that leave the domain.
std::vector<CriticalPoint> locate_critical_points(const Mesh& mesh, const Field& u);

// Winding number of the recovered gradient along the ordered inner boundary
// layer; the fractional residue is written to *residue when given. Throws
// CensusError when |residue| > 0.2 (ill-conditioned; refine the mesh).
int boundary_winding(const Mesh& mesh, const Field& u, double* residue = nullptr);

// min u > 0 over all nodes and -beta*u < 0 over boundary nodes (inward flux).
bool hopf_sign_check(const Mesh& mesh, const Field& u, double beta);

CritCensus census(const Mesh& mesh, const Field& u, double beta);

// Re-solves on meshes refined near the candidate points (target size halves
// per pass) until two consecutive censuses report the same kind multiset,
// index sum, and winding. Throws CensusError when max_passes refinements do
// not stabilize the census.
CritCensus census_with_refinement(const BoundaryCurve& curve, double h, double beta,
                                  const std::function<Field(const Mesh&)>& solve,
                                  int max_passes = 3);

}  // namespace robinlab
