#include "robinlab/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "robinlab/stability.hpp"

namespace robinlab {
namespace {

// Uniform view of the Robin system (all nodes) and the Dirichlet system
// (boundary rows/columns eliminated); vectors move between the two index
// spaces with down()/up().
struct System {
  SparseMatrix A;
  SparseMatrix M;
  std::vector<int> map;  // full -> system index, empty means identity
  int n_full = 0;

  int n() const { return A.size(); }
  Vector down(const Vector& full) const {
    return map.empty() ? full : restrict_vector(full, map, A.size());
  }
  Vector up(const Vector& sys) const {
    return map.empty() ? sys : prolong_vector(sys, map, n_full);
  }
};

System robin_system(const Mesh& mesh, double beta) {
  if (!(beta > 0.0)) throw SolveError("beta must be positive");
  System s;
  s.n_full = mesh.node_count();
  s.A = SparseMatrix::combine(stiffness(mesh), 1.0, boundary_mass(mesh), beta);
  s.M = interior_mass(mesh);
  return s;
}

System dirichlet_system(const Mesh& mesh) {
  System s;
  s.n_full = mesh.node_count();
  std::vector<char> keep(mesh.node_count());
  int n_new = 0;
  for (int i = 0; i < mesh.node_count(); ++i) {
    keep[i] = !mesh.on_boundary[i];
    if (keep[i]) ++n_new;
  }
  if (n_new == 0) throw SolveError("mesh has no interior nodes");
  s.map = restriction_map(keep);
  s.A = restrict_matrix(stiffness(mesh), s.map, n_new);
  s.M = restrict_matrix(interior_mass(mesh), s.map, n_new);
  return s;
}

Field torsion_solve(const Mesh& mesh, const System& sys) {
  const Vector b = sys.down(load_constant(mesh, 1.0));
  const Vector x = cg_solve(sys.A, b, 1e-11);
  Field u(mesh, sys.up(x));
  for (int i = 0; i < mesh.node_count(); ++i) {
    const bool eliminated = !sys.map.empty() && sys.map[i] < 0;
    if (!eliminated && !(u[i] > 0.0))
      throw SolveError("torsion solution lost positivity (refine the mesh)");
  }
  return u;
}

EigenResult eigen_solve(const Mesh& mesh, const System& sys, double tol) {
  const EigenPair ep = smallest_eigpair(sys.A, sys.M, tol, 300);
  Vector vf = sys.up(ep.v);
  int peak = 0;
  for (int i = 1; i < static_cast<int>(vf.size()); ++i)
    if (std::abs(vf[i]) > std::abs(vf[peak])) peak = i;
  if (vf[peak] < 0.0)
    for (double& c : vf) c = -c;
  const double sup = vf[peak] < 0.0 ? -vf[peak] : vf[peak];
  if (!(sup > 0.0)) throw EigenError("eigenfield is identically zero");
  for (double& c : vf) c /= sup;
  for (int i = 0; i < mesh.node_count(); ++i) {
    const bool eliminated = !sys.map.empty() && sys.map[i] < 0;
    if (!eliminated && vf[i] <= -1e-9)
      throw EigenError("first eigenfield is not positive (refine the mesh)");
  }
  EigenResult out;
  out.lambda_beta = ep.mu;
  out.field = Field(mesh, std::move(vf));
  out.residual = ep.residual;
  return out;
}

// Monotone fixed-point iteration from a given subsolution start (zero for the
// public entry point; the previous branch point during continuation, which is
// a subsolution for any larger lambda and preserves convergence to the
// minimal solution).
PicardResult picard_from(const Mesh& mesh, const System& sys, double lambda,
                         const Nonlinearity& g, const Vector& start, double tol,
                         int maxit, double cap) {
  if (!(lambda >= 0.0)) throw SolveError("lambda must be nonnegative");
  PicardResult res;
  Field u(mesh, start.empty() ? Vector(mesh.node_count(), 0.0) : start);
  Vector x = sys.down(u.values);
  Field s(mesh);
  for (int it = 1; it <= maxit; ++it) {
    bool blew_up = false;
    for (int i = 0; i < mesh.node_count(); ++i) {
      s[i] = lambda * g.base(u[i]);
      // 1e130 keeps every inner product downstream finite; any iterate whose
      // right side reaches that scale has left the minimal branch for good.
      if (!std::isfinite(s[i]) || s[i] > 1e130) blew_up = true;
    }
    res.iterations = it;
    if (blew_up) {
      res.converged = false;
      res.field = std::move(u);
      res.final_delta = std::numeric_limits<double>::infinity();
      return res;
    }
    const Vector b = sys.down(load(mesh, s));
    const CgOutcome cg =
        cg_solve_ex(sys.A, b, std::min(1e-11, 0.01 * tol), 10 * sys.n() + 2000, &x);
    if (!cg.converged)
      throw SolveError("fixed-point iteration: inner linear solve failed");
    x = cg.x;
    const Vector full = sys.up(x);
    double delta = 0.0;
    for (size_t i = 0; i < full.size(); ++i)
      delta = std::max(delta, std::abs(full[i] - u.values[i]));
    u.values = full;
    res.final_delta = delta;
    if (u.max_value() > cap) {
      res.converged = false;
      res.field = std::move(u);
      return res;
    }
    if (delta <= tol) {
      res.converged = true;
      res.field = std::move(u);
      return res;
    }
  }
  res.converged = false;
  res.field = std::move(u);
  return res;
}

using Mu1Fn = std::function<std::pair<double, Field>(const Field& u, double lambda,
                                                     const Field* warm)>;

Branch march_branch(const Mesh& mesh, const System& sys, const Nonlinearity& g,
                    const StepPolicy& pol, const Mu1Fn& mu1_fn,
                    double stability_scale) {
  if (!(pol.initial_step > 0.0) || !(pol.growth > 1.0) ||
      !(pol.bracket_rel_width > 0.0))
    throw SolveError("invalid continuation step policy");
  const double stable_floor = -1e-8 * stability_scale;

  Branch br;
  br.lambda_star_hi = std::numeric_limits<double>::infinity();

  const auto record = [&](double lambda, PicardResult&& pr) {
    BranchPoint pt;
    pt.lambda = lambda;
    pt.picard_iters = pr.iterations;
    pt.field = std::move(pr.field);
    br.points.push_back(std::move(pt));
  };

  // lambda = 0: the zero solution, linearization weight vanishes.
  {
    PicardResult zero;
    zero.converged = true;
    zero.field = Field(mesh, 0.0);
    zero.iterations = 0;
    record(0.0, std::move(zero));
  }

  double lo = 0.0;
  double step = pol.initial_step;
  double lambda = step;
  Vector start = br.points.back().field.values;  // zero field
  while (static_cast<int>(br.points.size()) < pol.max_points) {
    PicardResult pr = picard_from(mesh, sys, lambda, g, start, pol.picard_tol,
                                  pol.picard_maxit, pol.cap);
    if (pr.converged) {
      lo = lambda;
      start = pr.field.values;
      record(lambda, std::move(pr));
      if (std::isinf(br.lambda_star_hi)) {
        step *= pol.growth;
        lambda = lo + step;
        continue;
      }
    } else {
      br.lambda_star_hi = std::min(br.lambda_star_hi, lambda);
    }
    if ((br.lambda_star_hi - lo) / br.lambda_star_hi <= pol.bracket_rel_width) break;
    lambda = 0.5 * (lo + br.lambda_star_hi);
  }
  if (std::isinf(br.lambda_star_hi))
    throw SolveError(
        "no divergence found while continuing the branch; the extremal "
        "parameter may be infinite for this nonlinearity");
  br.lambda_star_lo = lo;

  std::sort(br.points.begin(), br.points.end(),
            [](const BranchPoint& a, const BranchPoint& b) {
              return a.lambda < b.lambda;
            });
  for (size_t i = 1; i < br.points.size(); ++i)
    if (!(br.points[i].lambda > br.points[i - 1].lambda))
      throw SolveError("branch lambdas are not strictly increasing");

  if (pol.with_mu1) {
    Field warm_eig(mesh);
    bool have_warm = false;
    for (BranchPoint& pt : br.points) {
      const auto [mu, phi] = mu1_fn(pt.field, pt.lambda, have_warm ? &warm_eig : nullptr);
      pt.mu1 = mu;
      pt.stable = mu >= stable_floor;
      warm_eig = phi;
      have_warm = true;
    }
  }
  return br;
}

}  // namespace

Field solve_torsion(const Mesh& mesh, double beta) {
  return torsion_solve(mesh, robin_system(mesh, beta));
}

EigenResult robin_eigenpair(const Mesh& mesh, double beta, double tol) {
  if (!(beta > 0.0)) throw SolveError("beta must be positive");
  return eigen_solve(mesh, robin_system(mesh, beta), tol);
}

PicardResult picard_minimal(const Mesh& mesh, double beta, double lambda,
                            const Nonlinearity& g, double tol, int maxit, double cap) {
  return picard_from(mesh, robin_system(mesh, beta), lambda, g, {}, tol, maxit, cap);
}

Branch continue_branch(const Mesh& mesh, double beta, const Nonlinearity& g,
                       const StepPolicy& policy) {
  const System sys = robin_system(mesh, beta);
  const double scale = smallest_eigpair(sys.A, sys.M, policy.eig_tol, 300).mu;
  const Mu1Fn mu1_fn = [&mesh, beta, &g, &policy](const Field& u, double lambda,
                                                  const Field* warm) {
    return linearized_mu1(mesh, beta, u, g.with_scale(lambda), policy.eig_tol, warm);
  };
  return march_branch(mesh, sys, g, policy, mu1_fn, scale);
}

Field solve_torsion_dirichlet(const Mesh& mesh) {
  return torsion_solve(mesh, dirichlet_system(mesh));
}

EigenResult dirichlet_eigenpair(const Mesh& mesh, double tol) {
  return eigen_solve(mesh, dirichlet_system(mesh), tol);
}

PicardResult picard_minimal_dirichlet(const Mesh& mesh, double lambda,
                                      const Nonlinearity& g, double tol, int maxit,
                                      double cap) {
  return picard_from(mesh, dirichlet_system(mesh), lambda, g, {}, tol, maxit, cap);
}

Branch continue_branch_dirichlet(const Mesh& mesh, const Nonlinearity& g,
                                 const StepPolicy& policy) {
  const System sys = dirichlet_system(mesh);
  const double scale = smallest_eigpair(sys.A, sys.M, policy.eig_tol, 300).mu;
  const Mu1Fn mu1_fn = [&mesh, &g, &policy](const Field& u, double lambda,
                                            const Field* warm) {
    return linearized_mu1_dirichlet(mesh, u, g.with_scale(lambda), policy.eig_tol,
                                    warm);
  };
  return march_branch(mesh, sys, g, policy, mu1_fn, scale);
}

Field solve_dirichlet(const Mesh& mesh, const ProblemSpec& problem) {
  switch (problem.kind) {
    case ProblemSpec::Kind::Torsion:
      return solve_torsion_dirichlet(mesh);
    case ProblemSpec::Kind::Eigen:
      return dirichlet_eigenpair(mesh).field;
    case ProblemSpec::Kind::Gelfand: {
      PicardResult pr = picard_minimal_dirichlet(mesh, problem.lambda, problem.g);
      if (!pr.converged)
        throw SolveError(
            "no minimal solution at this lambda (above the extremal parameter)");
      return std::move(pr.field);
    }
  }
  throw SolveError("unknown problem kind");
}

SweepResult beta_sweep(const Mesh& mesh, const ProblemSpec& problem,
                       const std::vector<double>& betas) {
  if (betas.empty()) throw ConfigError("beta grid is empty");
  for (size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] > 0.0)) throw ConfigError("beta grid must be positive");
    if (i > 0 && !(betas[i] > betas[i - 1]))
      throw ConfigError("beta grid must be increasing");
  }
  SweepResult out;
  switch (problem.kind) {
    case ProblemSpec::Kind::Torsion:
      out.dirichlet_field = solve_torsion_dirichlet(mesh);
      break;
    case ProblemSpec::Kind::Eigen: {
      const EigenResult d = dirichlet_eigenpair(mesh);
      out.dirichlet_field = d.field;
      out.dirichlet_eigenvalue = d.lambda_beta;
      break;
    }
    case ProblemSpec::Kind::Gelfand: {
      PicardResult pr = picard_minimal_dirichlet(mesh, problem.lambda, problem.g);
      if (!pr.converged)
        throw SolveError("Dirichlet limit has no solution at this lambda");
      out.dirichlet_field = std::move(pr.field);
      break;
    }
  }
  for (const double beta : betas) {
    SweepEntry e;
    e.beta = beta;
    switch (problem.kind) {
      case ProblemSpec::Kind::Torsion:
        e.field = solve_torsion(mesh, beta);
        break;
      case ProblemSpec::Kind::Eigen: {
        const EigenResult r = robin_eigenpair(mesh, beta);
        e.field = r.field;
        e.eigenvalue = r.lambda_beta;
        break;
      }
      case ProblemSpec::Kind::Gelfand: {
        PicardResult pr = picard_minimal(mesh, beta, problem.lambda, problem.g);
        if (!pr.converged)
          throw SolveError("no solution at this lambda for a beta in the sweep");
        e.field = std::move(pr.field);
        break;
      }
    }
    double diff = 0.0;
    for (int i = 0; i < mesh.node_count(); ++i)
      diff = std::max(diff, std::abs(e.field[i] - out.dirichlet_field[i]));
    e.sup_diff = diff;
    out.entries.push_back(std::move(e));
  }
  return out;
}

ComparisonReport comparison_bound(const Mesh& mesh, double beta,
                                  const Nonlinearity& g, double lambda) {
  PicardResult pr = picard_minimal(mesh, beta, lambda, g);
  if (!pr.converged)
    throw SolveError("comparison bound needs a converged solution (lambda too large)");
  ComparisonReport rep;
  rep.bound_constant = lambda * g.base(pr.field.max_value());
  Field v = solve_torsion(mesh, beta);
  double worst = -1e300;
  for (int i = 0; i < mesh.node_count(); ++i)
    worst = std::max(worst, pr.field[i] - rep.bound_constant * v[i]);
  rep.max_violation = worst;
  rep.holds = worst <= 1e-8;
  return rep;
}

}  // namespace robinlab
