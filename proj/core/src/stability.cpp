#include "robinlab/stability.hpp"

#include <cmath>

namespace robinlab {
namespace {

void orient_peak_positive(Vector& v) {
  size_t peak = 0;
  for (size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[peak])) peak = i;
  if (v[peak] < 0.0)
    for (double& c : v) c = -c;
}

void require_field_on(const Mesh& mesh, const Field& f) {
  if (f.mesh != &mesh) throw SolveError("field does not belong to this mesh");
  f.ensure_valid();
}

std::pair<double, Field> mu1_robin(const Mesh& mesh, double beta, const Field& w,
                                   double tol, const Field* warm) {
  if (!(beta > 0.0)) throw SolveError("beta must be positive");
  require_field_on(mesh, w);
  const SparseMatrix robin_op =
      SparseMatrix::combine(stiffness(mesh), 1.0, boundary_mass(mesh), beta);
  const SparseMatrix A =
      SparseMatrix::combine(robin_op, 1.0, weighted_mass(mesh, w), -1.0);
  const SparseMatrix M = interior_mass(mesh);
  const Vector* v0 = warm ? &warm->values : nullptr;
  const EigenPair ep = smallest_eigpair(A, M, tol, 300, v0);
  Vector v = ep.v;
  orient_peak_positive(v);
  return {ep.mu, Field(mesh, std::move(v))};
}

std::pair<double, Field> mu1_dirichlet(const Mesh& mesh, const Field& w, double tol,
                                       const Field* warm) {
  require_field_on(mesh, w);
  std::vector<char> keep(mesh.node_count());
  int n_new = 0;
  for (int i = 0; i < mesh.node_count(); ++i) {
    keep[i] = !mesh.on_boundary[i];
    if (keep[i]) ++n_new;
  }
  if (n_new == 0) throw SolveError("mesh has no interior nodes");
  const std::vector<int> map = restriction_map(keep);
  const SparseMatrix A = restrict_matrix(
      SparseMatrix::combine(stiffness(mesh), 1.0, weighted_mass(mesh, w), -1.0), map,
      n_new);
  const SparseMatrix M = restrict_matrix(interior_mass(mesh), map, n_new);
  Vector v0_store;
  const Vector* v0 = nullptr;
  if (warm) {
    v0_store = restrict_vector(warm->values, map, n_new);
    v0 = &v0_store;
  }
  const EigenPair ep = smallest_eigpair(A, M, tol, 300, v0);
  Vector v = prolong_vector(ep.v, map, mesh.node_count());
  orient_peak_positive(v);
  return {ep.mu, Field(mesh, std::move(v))};
}

Field fprime_field(const Mesh& mesh, const Field& u, const Nonlinearity& g) {
  require_field_on(mesh, u);
  Field w(mesh);
  for (int i = 0; i < mesh.node_count(); ++i) w[i] = g.fprime(u[i]);
  return w;
}

}  // namespace

std::pair<double, Field> linearized_mu1(const Mesh& mesh, double beta, const Field& u,
                                        const Nonlinearity& g, double tol,
                                        const Field* warm) {
  return mu1_robin(mesh, beta, fprime_field(mesh, u, g), tol, warm);
}

std::pair<double, Field> linearized_mu1_weighted(const Mesh& mesh, double beta,
                                                 const Field& w, double tol,
                                                 const Field* warm) {
  return mu1_robin(mesh, beta, w, tol, warm);
}

std::pair<double, Field> linearized_mu1_dirichlet(const Mesh& mesh, const Field& u,
                                                  const Nonlinearity& g, double tol,
                                                  const Field* warm) {
  return mu1_dirichlet(mesh, fprime_field(mesh, u, g), tol, warm);
}

std::pair<double, Field> linearized_mu1_dirichlet_weighted(const Mesh& mesh,
                                                           const Field& w, double tol,
                                                           const Field* warm) {
  return mu1_dirichlet(mesh, w, tol, warm);
}

StabilityReport boundary_instability_check(const Mesh& mesh,
                                           const BoundaryCurve& curve, double beta,
                                           const Field& u, const Nonlinearity& g) {
  if (!(beta > 0.0)) throw SolveError("beta must be positive");
  require_field_on(mesh, u);
  StabilityReport rep;
  double integral = 0.0;
  for (const BoundaryEdge& e : mesh.boundary_edges) {
    const double um = 0.5 * (u[e.i] + u[e.j]);
    if (!(um > 0.0))
      throw SolveError(
          "boundary stability test requires u > 0 at boundary midpoints");
    const double tm = 0.5 * (e.t_i + e.t_j);
    const CurveSample s = sample(curve, tm);
    const double integrand =
        beta * beta * um * um * (beta - s.kappa + g.f(um) / (beta * um));
    integral += integrand * e.length;
  }
  rep.boundary_integral = integral;
  rep.min_curvature = convexity_report(curve, 2048).min_kappa;
  rep.curvature_condition = beta + rep.min_curvature >= 0.0;
  rep.unstable = integral < 0.0 && rep.curvature_condition;
  return rep;
}

StabilityReport assess_stability(const Mesh& mesh, const BoundaryCurve& curve,
                                 double beta, const Field& u, const Nonlinearity& g,
                                 double tol) {
  StabilityReport rep = boundary_instability_check(mesh, curve, beta, u, g);
  auto [mu, phi] = linearized_mu1(mesh, beta, u, g, tol);
  rep.mu1 = mu;
  rep.eigfield = std::move(phi);
  return rep;
}

}  // namespace robinlab
