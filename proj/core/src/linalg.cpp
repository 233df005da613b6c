#include "robinlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace robinlab {

SparseMatrix SparseMatrix::from_triplets(
    int n, std::vector<std::tuple<int, int, double>> entries) {
  if (n <= 0) throw SolveError("sparse matrix dimension must be positive");
  for (const auto& [i, j, v] : entries) {
    if (i < 0 || i >= n || j < 0 || j >= n)
      throw SolveError("sparse triplet index out of range");
    if (!std::isfinite(v)) throw SolveError("sparse triplet value is not finite");
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return std::get<0>(a) != std::get<0>(b) ? std::get<0>(a) < std::get<0>(b)
                                            : std::get<1>(a) < std::get<1>(b);
  });
  SparseMatrix out;
  out.n_ = n;
  out.rowptr_.assign(n + 1, 0);
  size_t k = 0;
  for (int row = 0; row < n; ++row) {
    while (k < entries.size() && std::get<0>(entries[k]) == row) {
      const int col = std::get<1>(entries[k]);
      double acc = 0.0;
      while (k < entries.size() && std::get<0>(entries[k]) == row &&
             std::get<1>(entries[k]) == col) {
        acc += std::get<2>(entries[k]);
        ++k;
      }
      if (acc != 0.0) {
        out.cols_.push_back(col);
        out.vals_.push_back(acc);
      }
    }
    out.rowptr_[row + 1] = static_cast<int>(out.cols_.size());
  }
  out.check_symmetric();
  return out;
}

void SparseMatrix::multiply(const Vector& x, Vector& y) const {
  if (static_cast<int>(x.size()) != n_)
    throw SolveError("matrix-vector size mismatch");
  y.assign(n_, 0.0);
  for (int i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (int k = rowptr_[i]; k < rowptr_[i + 1]; ++k) acc += vals_[k] * x[cols_[k]];
    y[i] = acc;
  }
}

Vector SparseMatrix::multiply(const Vector& x) const {
  Vector y;
  multiply(x, y);
  return y;
}

Vector SparseMatrix::diagonal() const {
  Vector d(n_, 0.0);
  for (int i = 0; i < n_; ++i)
    for (int k = rowptr_[i]; k < rowptr_[i + 1]; ++k)
      if (cols_[k] == i) d[i] = vals_[k];
  return d;
}

double SparseMatrix::inf_norm() const {
  double best = 0.0;
  for (int i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (int k = rowptr_[i]; k < rowptr_[i + 1]; ++k) acc += std::abs(vals_[k]);
    best = std::max(best, acc);
  }
  return best;
}

double SparseMatrix::entry(int i, int j) const {
  if (i < 0 || i >= n_ || j < 0 || j >= n_) return 0.0;
  const auto begin = cols_.begin() + rowptr_[i];
  const auto end = cols_.begin() + rowptr_[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return vals_[it - cols_.begin()];
}

void SparseMatrix::check_symmetric(double tol) const {
  double scale = 0.0;
  for (const double v : vals_) scale = std::max(scale, std::abs(v));
  for (int i = 0; i < n_; ++i)
    for (int k = rowptr_[i]; k < rowptr_[i + 1]; ++k) {
      const int j = cols_[k];
      const double vt = entry(j, i);
      if (std::abs(vals_[k] - vt) > tol * std::max(1.0, scale))
        throw SolveError("matrix is not symmetric");
    }
}

SparseMatrix SparseMatrix::combine(const SparseMatrix& a, double ca,
                                   const SparseMatrix& b, double cb) {
  if (a.n_ != b.n_) throw SolveError("combine: dimension mismatch");
  SparseMatrix out;
  out.n_ = a.n_;
  out.rowptr_.assign(a.n_ + 1, 0);
  out.cols_.reserve(a.cols_.size() + b.cols_.size());
  out.vals_.reserve(a.vals_.size() + b.vals_.size());
  for (int i = 0; i < a.n_; ++i) {
    int ka = a.rowptr_[i];
    int kb = b.rowptr_[i];
    while (ka < a.rowptr_[i + 1] || kb < b.rowptr_[i + 1]) {
      int col;
      double v = 0.0;
      const int ca_col = ka < a.rowptr_[i + 1] ? a.cols_[ka]
                                               : std::numeric_limits<int>::max();
      const int cb_col = kb < b.rowptr_[i + 1] ? b.cols_[kb]
                                               : std::numeric_limits<int>::max();
      if (ca_col <= cb_col) {
        col = ca_col;
        v += ca * a.vals_[ka++];
      } else {
        col = cb_col;
      }
      if (cb_col == col && (kb < b.rowptr_[i + 1])) v += cb * b.vals_[kb++];
      if (v != 0.0) {
        out.cols_.push_back(col);
        out.vals_.push_back(v);
      }
    }
    out.rowptr_[i + 1] = static_cast<int>(out.cols_.size());
  }
  return out;
}

std::vector<int> restriction_map(const std::vector<char>& keep) {
  std::vector<int> map(keep.size(), -1);
  int next = 0;
  for (size_t i = 0; i < keep.size(); ++i)
    if (keep[i]) map[i] = next++;
  return map;
}

SparseMatrix restrict_matrix(const SparseMatrix& a, const std::vector<int>& old_to_new,
                             int n_new) {
  std::vector<std::tuple<int, int, double>> trips;
  const auto& rp = a.row_offsets();
  const auto& cols = a.col_indices();
  const auto& vals = a.values();
  for (int i = 0; i < a.size(); ++i) {
    if (old_to_new[i] < 0) continue;
    for (int k = rp[i]; k < rp[i + 1]; ++k) {
      const int j = cols[k];
      if (old_to_new[j] < 0) continue;
      trips.emplace_back(old_to_new[i], old_to_new[j], vals[k]);
    }
  }
  return SparseMatrix::from_triplets(n_new, std::move(trips));
}

Vector restrict_vector(const Vector& x, const std::vector<int>& old_to_new, int n_new) {
  Vector out(n_new, 0.0);
  for (size_t i = 0; i < x.size(); ++i)
    if (old_to_new[i] >= 0) out[old_to_new[i]] = x[i];
  return out;
}

Vector prolong_vector(const Vector& xr, const std::vector<int>& old_to_new,
                      int n_full) {
  Vector out(n_full, 0.0);
  for (int i = 0; i < n_full; ++i)
    if (old_to_new[i] >= 0) out[i] = xr[old_to_new[i]];
  return out;
}

double dot(const Vector& a, const Vector& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

CgOutcome cg_solve_ex(const SparseMatrix& a, const Vector& b, double tol, int maxit,
                      const Vector* warm_start) {
  const int n = a.size();
  if (static_cast<int>(b.size()) != n) throw SolveError("cg: right side size mismatch");
  CgOutcome out;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    out.x.assign(n, 0.0);
    out.converged = true;
    return out;
  }
  if (!std::isfinite(bnorm))
    throw SolveError("cg: right side overflows double-precision norms");
  Vector prec = a.diagonal();
  for (double& d : prec) d = d > 0.0 ? 1.0 / d : 1.0;

  Vector x;
  Vector r;
  if (warm_start && static_cast<int>(warm_start->size()) == n) {
    x = *warm_start;
    r = a.multiply(x);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    if (!std::isfinite(norm2(r))) {  // unusable warm start
      x.assign(n, 0.0);
      r = b;
    }
  } else {
    x.assign(n, 0.0);
    r = b;
  }
  Vector z(n), p(n), q(n);
  for (int i = 0; i < n; ++i) z[i] = prec[i] * r[i];
  p = z;
  double rz = dot(r, z);
  double rnorm = norm2(r);
  if (rnorm <= tol * bnorm) {
    out.x = std::move(x);
    out.converged = true;
    out.rel_residual = rnorm / bnorm;
    return out;
  }
  for (int it = 1; it <= maxit; ++it) {
    a.multiply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) {
      out.x = std::move(x);
      out.iterations = it;
      out.rel_residual = rnorm / bnorm;
      out.negative_curvature = true;
      return out;
    }
    const double alpha = rz / pq;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    rnorm = norm2(r);
    out.iterations = it;
    if (rnorm <= tol * bnorm) {
      out.x = std::move(x);
      out.converged = true;
      out.rel_residual = rnorm / bnorm;
      return out;
    }
    for (int i = 0; i < n; ++i) z[i] = prec[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  out.x = std::move(x);
  out.rel_residual = rnorm / bnorm;
  return out;
}

Vector cg_solve(const SparseMatrix& a, const Vector& b, double tol, int maxit) {
  if (maxit <= 0) maxit = 10 * a.size() + 1000;
  CgOutcome out = cg_solve_ex(a, b, tol, maxit);
  if (!out.converged) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "cg did not converge in %d iterations (relative residual %.3e)%s",
                  out.iterations, out.rel_residual,
                  out.negative_curvature ? "; matrix is not positive definite" : "");
    throw SolveError(buf);
  }
  return out.x;
}

EigenPair smallest_eigpair(const SparseMatrix& a, const SparseMatrix& m, double tol,
                           int maxit, const Vector* v0) {
  const int n = a.size();
  if (m.size() != n) throw EigenError("eigensolver: operator size mismatch");

  const Vector mdiag = m.diagonal();
  double min_mdiag = std::numeric_limits<double>::infinity();
  for (const double d : mdiag) min_mdiag = std::min(min_mdiag, d);
  if (!(min_mdiag > 0.0))
    throw EigenError("eigensolver: mass matrix has a non-positive diagonal");
  const double sigma_floor = -a.inf_norm() / min_mdiag - 1.0;

  // Deterministic start biased toward low-frequency modes; a tiny per-index
  // wiggle avoids accidental orthogonality to the target eigenvector.
  Vector v(n, 1.0);
  if (v0 && static_cast<int>(v0->size()) == n) v = *v0;
  else
    for (int i = 0; i < n; ++i) v[i] = 1.0 + 1e-3 * std::sin(1.0 + 0.7 * i);

  Vector mv = m.multiply(v);
  double nrm = std::sqrt(dot(v, mv));
  if (!(nrm > 0.0)) throw EigenError("eigensolver: degenerate start vector");
  for (double& c : v) c /= nrm;
  double mu = dot(v, a.multiply(v));

  double dmu = std::numeric_limits<double>::infinity();
  Vector warm;
  int retries = 0;
  for (int outer = 1; outer <= maxit; ++outer) {
    double margin = 0.02 * (1.0 + std::abs(mu));
    if (std::isfinite(dmu)) margin = std::max(margin, 3.0 * std::abs(dmu));
    if (outer <= 2) margin = std::max(margin, 0.5 * (1.0 + std::abs(mu)));
    margin *= std::pow(4.0, retries);
    double sigma = mu - margin;
    if (sigma < sigma_floor) sigma = sigma_floor;

    const SparseMatrix shifted = SparseMatrix::combine(a, 1.0, m, -sigma);
    const Vector rhs = m.multiply(v);
    double eta = 1e-8;
    if (std::isfinite(dmu))
      eta = std::clamp(0.05 * std::abs(dmu) / (1.0 + std::abs(mu)), 1e-13, 1e-8);
    const CgOutcome inner =
        cg_solve_ex(shifted, rhs, eta, 10 * n + 2000, warm.empty() ? nullptr : &warm);
    if (!inner.converged || inner.negative_curvature) {
      if (++retries > 8)
        throw EigenError("eigensolver: shifted solves keep failing (indefinite or "
                         "ill-conditioned operator)");
      warm.clear();
      continue;
    }
    retries = 0;
    warm = inner.x;

    Vector w = inner.x;
    const Vector mw = m.multiply(w);
    const double wn = std::sqrt(dot(w, mw));
    if (!(wn > 0.0)) throw EigenError("eigensolver: inverse iteration collapsed");
    for (double& c : w) c /= wn;
    const double mu_new = dot(w, a.multiply(w));
    dmu = mu_new - mu;
    mu = mu_new;
    v = std::move(w);

    if (std::abs(dmu) <= tol * (1.0 + std::abs(mu))) {
      const Vector av = a.multiply(v);
      const Vector mv2 = m.multiply(v);
      Vector res(n);
      for (int i = 0; i < n; ++i) res[i] = av[i] - mu * mv2[i];
      const double rn = norm2(res);
      if (rn <= 10.0 * tol * norm2(mv2)) {
        EigenPair out;
        out.mu = mu;
        out.v = std::move(v);
        out.residual = rn;
        out.outer_iterations = outer;
        return out;
      }
    }
  }
  throw EigenError("eigensolver did not converge within the outer iteration limit");
}

Vector solve_dense(int n, std::vector<double> a, Vector b) {
  if (static_cast<int>(a.size()) != n * n || static_cast<int>(b.size()) != n)
    throw SolveError("solve_dense: shape mismatch");
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-300)
      throw SolveError("solve_dense: singular system");
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
      std::swap(b[piv], b[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  Vector x(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[r];
    for (int c = r + 1; c < n; ++c) acc -= a[r * n + c] * x[c];
    x[r] = acc / a[r * n + r];
  }
  return x;
}

}  // namespace robinlab
