#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "robinlab/common.hpp"

namespace robinlab {

using Vector = std::vector<double>;

// Symmetric sparse matrix in compressed-row storage. Symmetry is a type
// invariant verified at construction.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  // Duplicate (i,j) entries are summed; exact zeros after summing are dropped.
  static SparseMatrix from_triplets(int n,
                                    std::vector<std::tuple<int, int, double>> entries);

  int size() const { return n_; }
  int nnz() const { return static_cast<int>(vals_.size()); }
  const std::vector<int>& row_offsets() const { return rowptr_; }
  const std::vector<int>& col_indices() const { return cols_; }
  const std::vector<double>& values() const { return vals_; }

  void multiply(const Vector& x, Vector& y) const;  // y = A x
  Vector multiply(const Vector& x) const;
  Vector diagonal() const;
  double inf_norm() const;
  double entry(int i, int j) const;  // 0 when the position is not stored

  void check_symmetric(double tol = 1e-12) const;  // throws SolveError

  // ca*A + cb*B with merged sparsity patterns.
  static SparseMatrix combine(const SparseMatrix& a, double ca, const SparseMatrix& b,
                              double cb);

 private:
  int n_ = 0;
  std::vector<int> rowptr_{0};
  std::vector<int> cols_;
  std::vector<double> vals_;
};

// Index-restriction helpers (used for Dirichlet boundary elimination).
// restriction_map turns a keep-mask into old->new indices (-1 = dropped).
std::vector<int> restriction_map(const std::vector<char>& keep);
SparseMatrix restrict_matrix(const SparseMatrix& a, const std::vector<int>& old_to_new,
                             int n_new);
Vector restrict_vector(const Vector& x, const std::vector<int>& old_to_new, int n_new);
Vector prolong_vector(const Vector& xr, const std::vector<int>& old_to_new, int n_full);

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);

struct CgOutcome {
  Vector x;
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
  bool negative_curvature = false;  // encountered p'Ap <= 0 (A not SPD)
};

// Jacobi-preconditioned conjugate gradients on a symmetric positive definite
// system. The extended entry point reports failure modes instead of throwing
// and accepts a warm start (used by Picard loops and shifted eigensolves).
CgOutcome cg_solve_ex(const SparseMatrix& a, const Vector& b, double tol, int maxit,
                      const Vector* warm_start = nullptr);

// Contract form: returns x with ||Ax-b|| <= tol*||b||, throws SolveError with
// the final residual when maxit is exceeded. maxit = 0 selects 10n + 1000.
Vector cg_solve(const SparseMatrix& a, const Vector& b, double tol = 1e-10,
                int maxit = 0);

struct EigenPair {
  double mu = 0.0;
  Vector v;               // normalized so that v' M v = 1
  double residual = 0.0;  // ||A v - mu M v||_2
  int outer_iterations = 0;
};

// Smallest eigenvalue of the generalized symmetric problem A v = mu M v
// (M positive definite, A possibly indefinite) by shift-and-invert inverse
// iteration. The certified below-spectrum shift -||A||_inf/min(diag M) - 1
// seeds the scheme; subsequent shifts track the Rayleigh quotient from below
// with a safeguarded margin, falling back toward the certified shift whenever
// an inner solve reports indefiniteness. Convergence: |delta mu| <=
// tol*(1+|mu|) and residual <= 10*tol*||M v||_2. Optional v0 warm-starts the
// iteration (useful along solution branches).
EigenPair smallest_eigpair(const SparseMatrix& a, const SparseMatrix& m,
                           double tol = 1e-10, int maxit = 200,
                           const Vector* v0 = nullptr);

// Dense helper: solves the small row-major n*n system in place (partial
// pivoting); used by local quadratic fits. Throws SolveError when singular.
Vector solve_dense(int n, std::vector<double> a, Vector b);

}  // namespace robinlab
