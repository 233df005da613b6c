#pragma once

#include <utility>

#include "robinlab/assembly.hpp"
#include "robinlab/geometry.hpp"
#include "robinlab/linalg.hpp"
#include "robinlab/mesh.hpp"

namespace robinlab {

// Stability assessment of a solution u of -Δu = f(u) with the Robin condition:
// mu1 is the smallest eigenvalue of the linearized operator
//   ∫∇φ·∇ψ + β∮φψ − ∫f'(u)φψ = μ ∫φψ,
// and the boundary test integrates β²u²(β − κ + f(u)/(βu)) over the boundary.
struct StabilityReport {
  double mu1 = 0.0;
  Field eigfield;                   // M-normalized, oriented positive at its peak
  double boundary_integral = 0.0;   // ∮ β²u²(β − κ + f(u)/(βu)) dσ
  double min_curvature = 0.0;       // min κ over the analytic boundary
  bool curvature_condition = false; // β + min κ ≥ 0
  bool unstable = false;            // boundary_integral < 0 while the condition holds
};

// Smallest eigenvalue of the linearization at u; weight f'(u) interpolated at
// the nodes. `warm` optionally seeds the eigensolver with a previous
// eigenfield. Returns {mu1, eigenfield with vᵀMv = 1}.
std::pair<double, Field> linearized_mu1(const Mesh& mesh, double beta, const Field& u,
                                        const Nonlinearity& g, double tol = 1e-9,
                                        const Field* warm = nullptr);

// Same with an arbitrary nodal weight w in place of f'(u).
std::pair<double, Field> linearized_mu1_weighted(const Mesh& mesh, double beta,
                                                 const Field& w, double tol = 1e-9,
                                                 const Field* warm = nullptr);

// Dirichlet counterparts (boundary rows and columns eliminated; the returned
// eigenfield has zeros at boundary nodes).
std::pair<double, Field> linearized_mu1_dirichlet(const Mesh& mesh, const Field& u,
                                                  const Nonlinearity& g,
                                                  double tol = 1e-9,
                                                  const Field* warm = nullptr);
std::pair<double, Field> linearized_mu1_dirichlet_weighted(const Mesh& mesh,
                                                           const Field& w,
                                                           double tol = 1e-9,
                                                           const Field* warm = nullptr);

// Boundary instability test alone: edge-midpoint quadrature with curvature
// evaluated on the analytic curve at the midpoint parameter. Requires u > 0 at
// boundary midpoints (positivity of Robin solutions). The conclusion
// `unstable` needs both a negative integral and β + min κ ≥ 0; mu1/eigfield
// are left at their defaults.
StabilityReport boundary_instability_check(const Mesh& mesh,
                                           const BoundaryCurve& curve, double beta,
                                           const Field& u, const Nonlinearity& g);

// Full report: linearized mu1 plus the boundary test.
StabilityReport assess_stability(const Mesh& mesh, const BoundaryCurve& curve,
                                 double beta, const Field& u, const Nonlinearity& g,
                                 double tol = 1e-9);

}  // namespace robinlab
