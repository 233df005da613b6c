#include <cmath>

#include "doctest.h"
#include "robinlab/critpoints.hpp"
#include "robinlab/solvers.hpp"

using namespace robinlab;

namespace {

const Mesh& disk05() {
  static const Mesh mesh = triangulate(make_domain(DomainSpec::disk(1.0)), 0.05);
  return mesh;
}

Field interpolate(const Mesh& mesh, double (*f)(Vec2)) {
  Field u(mesh);
  for (int i = 0; i < mesh.node_count(); ++i) u[i] = f(mesh.nodes[i]);
  return u;
}

}  // namespace

TEST_SUITE("critpoints") {

TEST_CASE("gradient recovery is exact on linear fields") {
  const Mesh& mesh = disk05();
  const Field u = interpolate(mesh, [](Vec2 p) { return p.x; });
  for (const Vec2& g : recover_gradient(mesh, u)) {
    CHECK(g.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(g.y) < 1e-12);
  }

  // Constant fields leave only cancellation noise of order eps*|u|/h.
  const Field c(mesh, 3.0);
  for (const Vec2& g : recover_gradient(mesh, c)) {
    CHECK(std::abs(g.x) < 1e-12);
    CHECK(std::abs(g.y) < 1e-12);
  }
}

TEST_CASE("gradient recovery near a smooth extremum") {
  const Mesh& mesh = disk05();
  const Field u = interpolate(mesh, [](Vec2 p) { return p.dot(p); });
  const std::vector<Vec2> grad = recover_gradient(mesh, u);
  int center = 0;
  for (int i = 1; i < mesh.node_count(); ++i)
    if (mesh.nodes[i].norm() < mesh.nodes[center].norm()) center = i;
  CHECK(grad[center].norm() <= 2.0 * mesh.h);
}

TEST_CASE("Hessian classification") {
  const Classification mx = classify_hessian(-2.0, 0.0, -2.0);
  CHECK(mx.kind == CriticalPoint::Kind::Max);
  CHECK(mx.index == 1);
  CHECK(mx.det == doctest::Approx(4.0));
  CHECK(mx.trace == doctest::Approx(-4.0));

  const Classification mn = classify_hessian(3.0, 0.0, 1.0);
  CHECK(mn.kind == CriticalPoint::Kind::Min);
  CHECK(mn.index == 1);

  const Classification sd = classify_hessian(2.0, 0.0, -2.0);
  CHECK(sd.kind == CriticalPoint::Kind::Saddle);
  CHECK(sd.index == -1);

  const Classification dg = classify_hessian(2.0, 0.0, 0.0);
  CHECK(dg.kind == CriticalPoint::Kind::Degenerate);
  CHECK(dg.index == 0);

  // Rotation must not change the outcome: x^2 - y^2 rotated 45 degrees.
  const Classification rot = classify_hessian(0.0, 2.0, 0.0);
  CHECK(rot.kind == CriticalPoint::Kind::Saddle);

  CHECK(std::string(CriticalPoint::kind_name(CriticalPoint::Kind::Max)) == "max");
}

TEST_CASE("torsion on the disk has one maximum at the center") {
  const Mesh& mesh = disk05();
  const Field u = solve_torsion(mesh, 1.0);
  const std::vector<CriticalPoint> pts = locate_critical_points(mesh, u);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].kind == CriticalPoint::Kind::Max);
  CHECK(pts[0].index == 1);
  CHECK(pts[0].position.norm() <= 2.0 * mesh.h);
  CHECK(pts[0].value == doctest::Approx(0.75).epsilon(1e-2));
  CHECK(pts[0].grad_residual <= 1e-2);
  // The radial profile (1-r^2)/4 has Hessian -I/2.
  CHECK(pts[0].hessian[0] == doctest::Approx(-0.5).epsilon(0.2));
  CHECK(pts[0].hessian[2] == doctest::Approx(-0.5).epsilon(0.2));
  CHECK(std::abs(pts[0].hessian[1]) < 0.1);
}

TEST_CASE("eigenfield on the ellipse has one interior maximum") {
  const Mesh mesh = triangulate(make_domain(DomainSpec::ellipse(2.0, 1.0)), 0.1);
  const EigenResult eig = robin_eigenpair(mesh, 4.0);
  const std::vector<CriticalPoint> pts = locate_critical_points(mesh, eig.field);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].kind == CriticalPoint::Kind::Max);
  CHECK(pts[0].position.norm() <= 3.0 * mesh.h);
}

TEST_CASE("synthetic paraboloid census") {
  const Mesh& mesh = disk05();
  const Field u = interpolate(mesh, [](Vec2 p) { return 2.0 - p.dot(p); });
  const CritCensus c = census(mesh, u, 1.0);
  CHECK(c.points.size() == 1);
  CHECK(c.count(CriticalPoint::Kind::Max) == 1);
  CHECK(c.index_sum == 1);
  CHECK(c.boundary_winding == 1);
  CHECK(std::abs(c.winding_residue) <= 0.2);
  CHECK(c.hopf_ok);  // u = 1 > 0 on the boundary, flux -beta*u < 0
  CHECK(!c.any_degenerate);
  CHECK(c.signature() == "max:1");
}

TEST_CASE("synthetic saddle: indices and winding agree at -1") {
  // u = x^2 - y^2 + 3 has a saddle at the origin and a gradient that winds
  // backwards along the boundary; both topological counts must report it.
  const Mesh& mesh = disk05();
  const Field u = interpolate(mesh, [](Vec2 p) { return p.x * p.x - p.y * p.y + 3.0; });
  const CritCensus c = census(mesh, u, 1.0);
  CHECK(c.count(CriticalPoint::Kind::Saddle) == 1);
  CHECK(c.index_sum == -1);
  CHECK(c.boundary_winding == -1);
}

TEST_CASE("winding of a constant field is rejected") {
  const Mesh& mesh = disk05();
  const Field flat(mesh, 1.0);
  CHECK_THROWS_AS((void)boundary_winding(mesh, flat), CensusError);
}

TEST_CASE("torsion winding and Hopf sign on the disk") {
  const Mesh& mesh = disk05();
  const Field u = solve_torsion(mesh, 1.0);
  double residue = 1.0;
  CHECK(boundary_winding(mesh, u, &residue) == 1);
  CHECK(std::abs(residue) <= 0.2);
  CHECK(hopf_sign_check(mesh, u, 1.0));

  // Boundary flux -beta*u is close to the radial value -1/2.
  for (const BoundaryEdge& e : mesh.boundary_edges)
    CHECK(-1.0 * u[e.i] == doctest::Approx(-0.5).epsilon(2e-2));

  Field bad = u;
  bad[0] = -bad[0];
  CHECK(!hopf_sign_check(mesh, bad, 1.0));
}

TEST_CASE("corrugated strip: multiple maxima, saddles between them") {
  const BoundaryCurve cor = make_domain(DomainSpec::corrugated_strip(6.0, 0.08, 3));
  const Mesh mesh = triangulate(cor, 0.07);
  const Field u = solve_torsion(mesh, 100.0);
  const CritCensus c = census(mesh, u, 100.0);
  CHECK(c.count(CriticalPoint::Kind::Max) >= 3);
  CHECK(c.count(CriticalPoint::Kind::Saddle) >= 2);
  CHECK(c.count(CriticalPoint::Kind::Min) == 0);
  CHECK(c.index_sum == 1);
  CHECK(c.boundary_winding == 1);
  CHECK(c.hopf_ok);
  // Maxima alternate with saddles along the strip axis; the saddles sit at
  // the pinched waists where the corrugation dips.
  for (const CriticalPoint& p : c.points)
    if (p.kind == CriticalPoint::Kind::Saddle) CHECK(std::abs(p.position.y - 0.5) < 0.3);
}

TEST_CASE("census is stable under refinement") {
  const BoundaryCurve disk = make_domain(DomainSpec::disk(1.0));
  const CritCensus c = census_with_refinement(
      disk, 0.1, 1.0, [](const Mesh& m) { return solve_torsion(m, 1.0); });
  CHECK(c.signature() == "max:1");
  CHECK(c.index_sum == 1);
  CHECK(c.boundary_winding == 1);
}

}  // TEST_SUITE
