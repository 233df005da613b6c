#pragma once

#include <vector>

#include "robinlab/assembly.hpp"

namespace robinlab {

// First eigenpair normalized to sup-norm 1 with positive orientation.
struct EigenResult {
  double lambda_beta = 0.0;
  Field field;
  double residual = 0.0;
};

// Outcome of the monotone fixed-point iteration for -Lap u = lambda g(u).
// converged == false means the iteration diverged (value cap or iteration
// limit), which is the expected signal above the extremal parameter.
struct PicardResult {
  bool converged = false;
  Field field;
  int iterations = 0;
  double final_delta = 0.0;
};

struct BranchPoint {
  double lambda = 0.0;
  Field field;
  int picard_iters = 0;
  double mu1 = 0.0;  // smallest linearized eigenvalue at this point
  bool stable = false;
};

struct Branch {
  std::vector<BranchPoint> points;  // strictly increasing lambda
  double lambda_star_lo = 0.0;      // largest lambda that converged
  double lambda_star_hi = 0.0;      // smallest lambda that diverged
  double bracket_width() const {
    return (lambda_star_hi - lambda_star_lo) / lambda_star_hi;
  }
};

struct StepPolicy {
  double initial_step = 0.1;
  double growth = 1.6;
  double bracket_rel_width = 0.01;  // target (hi-lo)/hi
  int max_points = 120;
  double picard_tol = 1e-9;
  int picard_maxit = 500;
  double cap = 1e6;
  double eig_tol = 1e-9;
  bool with_mu1 = true;  // attach linearized eigenvalues to branch points
};

struct ProblemSpec {
  enum class Kind { Torsion, Eigen, Gelfand };
  Kind kind = Kind::Torsion;
  double lambda = 0.0;                            // Gelfand only
  Nonlinearity g = Nonlinearity::torsion();       // Gelfand base
  static ProblemSpec torsion() { return {}; }
  static ProblemSpec eigen() { return {Kind::Eigen, 0.0, Nonlinearity::torsion()}; }
  static ProblemSpec gelfand(double lambda, Nonlinearity g) {
    return {Kind::Gelfand, lambda, g};
  }
};

// --- Robin problems ---------------------------------------------------------

// (K + beta*B) u = load(1); asserts positivity of the result.
Field solve_torsion(const Mesh& mesh, double beta);

// Smallest eigenvalue of (K + beta*B) v = mu M v, sup-normalized positive.
EigenResult robin_eigenpair(const Mesh& mesh, double beta, double tol = 1e-10);

// Fixed-point iterates u0 = 0, (K + beta*B) u_{n+1} = load(lambda g(u_n)).
PicardResult picard_minimal(const Mesh& mesh, double beta, double lambda,
                            const Nonlinearity& g, double tol = 1e-9,
                            int maxit = 500, double cap = 1e6);

// Marches lambda upward from 0 with adaptive steps, halving into a bisection
// bracket around the extremal parameter (relative width per policy). Branch
// points carry the smallest linearized eigenvalue when policy.with_mu1 is set.
Branch continue_branch(const Mesh& mesh, double beta, const Nonlinearity& g,
                       const StepPolicy& policy = {});

// --- Dirichlet baseline (boundary rows/columns eliminated) ------------------

Field solve_torsion_dirichlet(const Mesh& mesh);
EigenResult dirichlet_eigenpair(const Mesh& mesh, double tol = 1e-10);
PicardResult picard_minimal_dirichlet(const Mesh& mesh, double lambda,
                                      const Nonlinearity& g, double tol = 1e-9,
                                      int maxit = 500, double cap = 1e6);
Branch continue_branch_dirichlet(const Mesh& mesh, const Nonlinearity& g,
                                 const StepPolicy& policy = {});

// Dispatch wrapper: torsion | eigen | gelfand(lambda, g) with zero boundary
// values. The eigen variant returns the sup-normalized eigenfield.
Field solve_dirichlet(const Mesh& mesh, const ProblemSpec& problem);

// --- Sweeps and bounds -------------------------------------------------------

struct SweepEntry {
  double beta = 0.0;
  Field field;
  double eigenvalue = 0.0;  // populated for the eigen problem
  double sup_diff = 0.0;    // ||u_beta - u_D||_inf over nodes
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  Field dirichlet_field;
  double dirichlet_eigenvalue = 0.0;
};

// Solves the problem for each beta (increasing, positive) and the Dirichlet
// limit on the same mesh, reporting sup-norm distances to the limit.
SweepResult beta_sweep(const Mesh& mesh, const ProblemSpec& problem,
                       const std::vector<double>& betas);

struct ComparisonReport {
  bool holds = false;
  double max_violation = 0.0;   // max over nodes of u - bound
  double bound_constant = 0.0;  // lambda * max g over the solution range
};

// Checks the nodal bound u <= M * torsion_beta + 1e-8 where M bounds the
// right-hand side lambda*g over the observed solution range.
ComparisonReport comparison_bound(const Mesh& mesh, double beta,
                                  const Nonlinearity& g, double lambda);

}  // namespace robinlab
