#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "robinlab/assembly.hpp"
#include "robinlab/mesh.hpp"

using namespace robinlab;

namespace {

constexpr double kPi = std::numbers::pi;

// Single unit right triangle (0,0)-(1,0)-(0,1); element matrices are
// hand-computable on it. The boundary loop is the triangle's own edges.
Mesh reference_triangle() {
  Mesh m;
  m.nodes = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  m.triangles = {{0, 1, 2}};
  const double s = std::sqrt(2.0);
  m.boundary_edges = {
      {0, 1, 0.0, 1.0, 1.0, {0.0, -1.0}},
      {1, 2, 1.0, 2.0, s, {1.0 / s, 1.0 / s}},
      {2, 0, 2.0, 3.0, 1.0, {-1.0, 0.0}},
  };
  m.on_boundary = {1, 1, 1};
  m.h = 1.0;
  return m;
}

Field random_field(const Mesh& mesh, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Field f(mesh);
  for (int i = 0; i < f.size(); ++i) f[i] = uni(rng);
  return f;
}

double sum(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

const Mesh& disk_mesh() {
  static const Mesh mesh = triangulate(make_domain(DomainSpec::disk(1.0)), 0.05);
  return mesh;
}

}  // namespace

TEST_SUITE("assembly") {

TEST_CASE("stiffness of the reference triangle") {
  const Mesh tri = reference_triangle();
  const SparseMatrix k = stiffness(tri);
  const double want[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(k.entry(i, j) == doctest::Approx(want[i][j]).epsilon(1e-14));
  CHECK_NOTHROW(k.check_symmetric());
}

TEST_CASE("interior mass of the reference triangle") {
  const SparseMatrix m = interior_mass(reference_triangle());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(m.entry(i, j) == doctest::Approx((i == j ? 2.0 : 1.0) / 24.0).epsilon(1e-14));
}

TEST_CASE("boundary mass blocks and locality") {
  const Mesh tri = reference_triangle();
  const SparseMatrix b = boundary_mass(tri);
  // Edge (0,1) of length 1 contributes (1/6)[[2,1],[1,2]]; node pairs on two
  // edges accumulate both.
  CHECK(b.entry(0, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  const double s = std::sqrt(2.0);
  CHECK(b.entry(1, 2) == doctest::Approx(s / 6.0).epsilon(1e-14));
  CHECK(b.entry(0, 0) == doctest::Approx(2.0 * (1.0 + 1.0) / 6.0).epsilon(1e-14));
  CHECK(b.entry(1, 1) == doctest::Approx(2.0 * (1.0 + s) / 6.0).epsilon(1e-14));

  // On a real mesh, rows of interior nodes are identically zero.
  const Mesh& mesh = disk_mesh();
  const SparseMatrix bd = boundary_mass(mesh);
  const Vector row_action = bd.multiply(Vector(mesh.node_count(), 1.0));
  for (int i = 0; i < mesh.node_count(); ++i)
    if (!mesh.on_boundary[i]) CHECK(row_action[i] == 0.0);
}

TEST_CASE("constants lie in the stiffness kernel") {
  const Mesh& mesh = disk_mesh();
  const SparseMatrix k = stiffness(mesh);
  const Vector k1 = k.multiply(Vector(mesh.node_count(), 1.0));
  double worst = 0.0;
  for (double x : k1) worst = std::max(worst, std::abs(x));
  CHECK(worst <= 1e-12 * k.inf_norm());
}

TEST_CASE("partition-of-unity sums reproduce area and perimeter") {
  const Mesh& mesh = disk_mesh();
  const Vector ones(mesh.node_count(), 1.0);

  const double m_sum = dot(ones, interior_mass(mesh).multiply(ones));
  CHECK(m_sum == doctest::Approx(mesh.total_area()).epsilon(1e-12));
  CHECK(m_sum == doctest::Approx(kPi).epsilon(5e-3));

  const double b_sum = dot(ones, boundary_mass(mesh).multiply(ones));
  CHECK(b_sum == doctest::Approx(mesh.boundary_length()).epsilon(1e-12));
  CHECK(b_sum == doctest::Approx(2.0 * kPi).epsilon(5e-3));
}

TEST_CASE("Dirichlet energy of the radial torsion profile") {
  // u = (1 - r^2)/4 has integral of |grad u|^2 equal to pi/8 on the unit disk.
  const Mesh& mesh = disk_mesh();
  Field u(mesh);
  for (int i = 0; i < mesh.node_count(); ++i) {
    const Vec2 p = mesh.nodes[i];
    u[i] = 0.25 * (1.0 - p.dot(p));
  }
  const double energy = dot(u.values, stiffness(mesh).multiply(u.values));
  CHECK(energy == doctest::Approx(kPi / 8.0).epsilon(2e-2));
}

TEST_CASE("weighted mass: unit weight, zero weight, linearity") {
  const Mesh& mesh = disk_mesh();
  const Field w1 = random_field(mesh, 5);
  const Field w2 = random_field(mesh, 6);
  Field ones(mesh, 1.0), zeros(mesh, 0.0), w12(mesh);
  for (int i = 0; i < mesh.node_count(); ++i) w12[i] = w1[i] + w2[i];

  const SparseMatrix m = interior_mass(mesh);
  const SparseMatrix mw1 = weighted_mass(mesh, ones);
  const Vector probe = random_field(mesh, 7).values;
  const Vector a = m.multiply(probe);
  const Vector b = mw1.multiply(probe);
  for (size_t i = 0; i < a.size(); ++i)
    CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-14));

  CHECK(weighted_mass(mesh, zeros).nnz() == 0);

  const Vector lin_lhs = weighted_mass(mesh, w12).multiply(probe);
  const Vector s1 = weighted_mass(mesh, w1).multiply(probe);
  const Vector s2 = weighted_mass(mesh, w2).multiply(probe);
  for (size_t i = 0; i < lin_lhs.size(); ++i)
    CHECK(lin_lhs[i] == doctest::Approx(s1[i] + s2[i]).epsilon(1e-12));

  CHECK_NOTHROW(weighted_mass(mesh, w1).check_symmetric());
}

TEST_CASE("load vector pairs sources with hat functions") {
  const Mesh& mesh = disk_mesh();
  CHECK(sum(load_constant(mesh, 1.0)) == doctest::Approx(kPi).epsilon(5e-3));
  CHECK(sum(load_constant(mesh, 1.0)) == doctest::Approx(mesh.total_area()).epsilon(1e-12));

  const Field zero(mesh, 0.0);
  for (double x : load(mesh, zero)) CHECK(x == 0.0);

  // Same quadrature as the mass matrix: sum load(s) = 1' M s.
  const Field s = random_field(mesh, 9);
  const Vector ms = interior_mass(mesh).multiply(s.values);
  CHECK(sum(load(mesh, s)) == doctest::Approx(sum(ms)).epsilon(1e-12));
}

TEST_CASE("energy equals work for the discrete Robin torsion solve") {
  const Mesh& mesh = disk_mesh();
  const double beta = 1.0;
  const SparseMatrix a =
      SparseMatrix::combine(stiffness(mesh), 1.0, boundary_mass(mesh), beta);
  const Vector b = load_constant(mesh, 1.0);
  const Vector u = cg_solve(a, b, 1e-12);
  CHECK(dot(u, a.multiply(u)) == doctest::Approx(dot(b, u)).epsilon(1e-9));
}

TEST_CASE("nonlinearity kinds") {
  const Nonlinearity torsion = Nonlinearity::torsion();
  CHECK(torsion.base(3.7) == 1.0);
  CHECK(torsion.base_prime(3.7) == 0.0);

  const Nonlinearity gel = Nonlinearity::gelfand_exp(0.5);
  CHECK(gel.base(1.0) == doctest::Approx(std::exp(1.0)));
  CHECK(gel.base_prime(1.0) == doctest::Approx(std::exp(1.0)));
  CHECK(gel.f(1.0) == doctest::Approx(0.5 * std::exp(1.0)));
  CHECK(gel.with_scale(2.0).f(0.0) == doctest::Approx(2.0));

  const Nonlinearity pow2 = Nonlinearity::power(2.0, 1.0);
  CHECK(pow2.base(1.0) == doctest::Approx(4.0));
  CHECK(pow2.base_prime(1.0) == doctest::Approx(4.0));
  CHECK_THROWS_AS((void)Nonlinearity::power(0.0), Error);

  CHECK(!torsion.describe().empty());
  CHECK(!gel.describe().empty());
}

TEST_CASE("field validation") {
  const Mesh& mesh = disk_mesh();
  Field f(mesh, 2.0);
  CHECK_NOTHROW(f.ensure_valid());
  CHECK(f.max_value() == 2.0);

  f.values.pop_back();
  CHECK_THROWS_AS(f.ensure_valid(), SolveError);
  f.values.push_back(std::nan(""));
  CHECK_THROWS_AS(f.ensure_valid(), SolveError);

  Field g(mesh, 0.0);
  g[7] = -3.0;
  g[11] = 5.0;
  CHECK(g.min_value() == -3.0);
  CHECK(g.max_value() == 5.0);
  CHECK(g.sup_norm() == 5.0);
  CHECK(g.argmax() == 11);
  CHECK(g.argmax_location().x == mesh.nodes[11].x);
}

}  // TEST_SUITE
