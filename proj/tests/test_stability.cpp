#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "robinlab/solvers.hpp"
#include "robinlab/stability.hpp"

using namespace robinlab;

namespace {

constexpr double kPi = std::numbers::pi;

const Mesh& disk05() {
  static const Mesh mesh = triangulate(make_domain(DomainSpec::disk(1.0)), 0.05);
  return mesh;
}

}  // namespace

TEST_SUITE("stability") {

TEST_CASE("zero linearization weight reduces to the Robin eigenproblem") {
  const Mesh& mesh = disk05();
  for (double beta : {1.0, 10.0}) {
    const Field u = solve_torsion(mesh, beta);
    const auto [mu1, phi] = linearized_mu1(mesh, beta, u, Nonlinearity::torsion());
    const double lambda_beta = robin_eigenpair(mesh, beta).lambda_beta;
    CHECK(mu1 == doctest::Approx(lambda_beta).epsilon(1e-6));
    CHECK(phi.min_value() * phi.max_value() > 0.0);  // one-signed ground state
  }
}

TEST_CASE("eigen problem lives in the kernel of its own linearization") {
  const Mesh& mesh = disk05();
  for (double beta : {1.0, 10.0}) {
    const EigenResult eig = robin_eigenpair(mesh, beta);
    const Field w(mesh, eig.lambda_beta);  // f'(u) = lambda_beta
    const auto [mu1, phi] = linearized_mu1_weighted(mesh, beta, w);
    CHECK(std::abs(mu1) <= 1e-6 * eig.lambda_beta);
  }
}

TEST_CASE("linearized eigenvalue decreases toward the fold") {
  const Mesh& mesh = disk05();
  const Nonlinearity g = Nonlinearity::gelfand_exp();
  const Field u_low = picard_minimal(mesh, 1.0, 0.1, g).field;
  const Field u_high = picard_minimal(mesh, 1.0, 0.5, g).field;
  const double mu_low =
      linearized_mu1(mesh, 1.0, u_low, g.with_scale(0.1)).first;
  const double mu_high =
      linearized_mu1(mesh, 1.0, u_high, g.with_scale(0.5)).first;
  CHECK(mu_high < mu_low);
  CHECK(mu_high > 0.0);  // still on the stable minimal branch
}

TEST_CASE("Rayleigh certificate for the returned eigenfield") {
  const Mesh& mesh = disk05();
  const double beta = 1.0, tol = 1e-9;
  const Field u = solve_torsion(mesh, beta);
  const auto [mu1, phi] = linearized_mu1(mesh, beta, u, Nonlinearity::torsion(), tol);

  const SparseMatrix a =
      SparseMatrix::combine(stiffness(mesh), 1.0, boundary_mass(mesh), beta);
  const double form = dot(phi.values, a.multiply(phi.values));
  const double mass = dot(phi.values, interior_mass(mesh).multiply(phi.values));
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));  // M-normalized
  CHECK(form == doctest::Approx(mu1 * mass).epsilon(10.0 * tol / mu1 + 1e-9));
}

TEST_CASE("Dirichlet linearization") {
  const Mesh& mesh = disk05();
  const Field u = solve_torsion_dirichlet(mesh);
  const auto [mu1, phi] = linearized_mu1_dirichlet(mesh, u, Nonlinearity::torsion());
  CHECK(mu1 == doctest::Approx(oracles::disk_dirichlet_eigenvalue()).epsilon(1e-2));
  for (const BoundaryEdge& e : mesh.boundary_edges) CHECK(phi[e.i] == 0.0);
}

TEST_CASE("boundary integral on the disk matches the closed form") {
  // For disk torsion: u = 1/(2 beta) and kappa = 1 on the boundary, so the
  // integrand is beta^2 u^2 (beta - 1 + 2) = (beta + 1)/4 and the integral is
  // pi (beta + 1)/2.
  const Mesh& mesh = disk05();
  const BoundaryCurve disk = make_domain(DomainSpec::disk(1.0));
  for (double beta : {0.5, 1.0, 10.0}) {
    const Field u = solve_torsion(mesh, beta);
    const StabilityReport rep =
        boundary_instability_check(mesh, disk, beta, u, Nonlinearity::torsion());
    CHECK(rep.boundary_integral ==
          doctest::Approx(kPi * (beta + 1.0) / 2.0).epsilon(1e-2));
    CHECK(rep.min_curvature == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rep.curvature_condition);
    CHECK(!rep.unstable);
  }
}

TEST_CASE("boundary integral on the ellipse stays positive") {
  const BoundaryCurve ell = make_domain(DomainSpec::ellipse(2.0, 1.0));
  const Mesh mesh = triangulate(ell, 0.1);
  const Field u = solve_torsion(mesh, 1.0);
  const StabilityReport rep =
      boundary_instability_check(mesh, ell, 1.0, u, Nonlinearity::torsion());
  CHECK(rep.boundary_integral > 0.0);
  CHECK(rep.min_curvature == doctest::Approx(0.25).epsilon(1e-4));
  CHECK(rep.curvature_condition);
  CHECK(!rep.unstable);
}

TEST_CASE("concavity beyond -beta disables the boundary conclusion") {
  const BoundaryCurve cor = make_domain(DomainSpec::corrugated_strip(6.0, 0.08, 3));
  const Mesh mesh = triangulate(cor, 0.1);
  const double beta = 0.3;  // min kappa of this family is about -0.43
  const Field u = solve_torsion(mesh, beta);
  const StabilityReport rep =
      boundary_instability_check(mesh, cor, beta, u, Nonlinearity::torsion());
  CHECK(rep.min_curvature < -beta);
  CHECK(!rep.curvature_condition);
  CHECK(!rep.unstable);
}

TEST_CASE("nonpositive boundary values are a contract violation") {
  const Mesh& mesh = disk05();
  const BoundaryCurve disk = make_domain(DomainSpec::disk(1.0));
  const Field u_dir = solve_torsion_dirichlet(mesh);  // zero on the boundary
  CHECK_THROWS_AS((void)boundary_instability_check(mesh, disk, 1.0, u_dir,
                                                   Nonlinearity::torsion()),
                  SolveError);
}

TEST_CASE("combined report") {
  const Mesh& mesh = disk05();
  const BoundaryCurve disk = make_domain(DomainSpec::disk(1.0));
  const Field u = solve_torsion(mesh, 2.0);
  const StabilityReport rep =
      assess_stability(mesh, disk, 2.0, u, Nonlinearity::torsion());
  CHECK(rep.mu1 == doctest::Approx(robin_eigenpair(mesh, 2.0).lambda_beta).epsilon(1e-6));
  CHECK(rep.boundary_integral == doctest::Approx(kPi * 1.5).epsilon(1e-2));
  CHECK(!rep.unstable);
  // The report never claims instability without its two premises.
  CHECK((!rep.unstable || (rep.boundary_integral < 0.0 && rep.curvature_condition)));
}

}  // TEST_SUITE
