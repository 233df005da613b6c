#include "robinlab/assembly.hpp"

#include <cmath>
#include <cstdio>

namespace robinlab {

void Field::ensure_valid() const {
  if (!mesh) throw SolveError("field has no mesh");
  if (size() != mesh->node_count())
    throw SolveError("field length does not match its mesh");
  for (const double v : values)
    if (!std::isfinite(v)) throw SolveError("field has non-finite values");
}

double Field::max_value() const {
  double best = -1e300;
  for (const double v : values) best = std::max(best, v);
  return best;
}

double Field::min_value() const {
  double best = 1e300;
  for (const double v : values) best = std::min(best, v);
  return best;
}

double Field::sup_norm() const {
  double best = 0.0;
  for (const double v : values) best = std::max(best, std::abs(v));
  return best;
}

int Field::argmax() const {
  int best = 0;
  for (int i = 1; i < size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

Vec2 Field::argmax_location() const { return mesh->nodes[argmax()]; }

Nonlinearity Nonlinearity::power(double p, double lambda) {
  if (!(p > 0.0)) throw SolveError("power nonlinearity needs p > 0");
  Nonlinearity g;
  g.kind = Kind::Power;
  g.p = p;
  g.scale = lambda;
  return g;
}

double Nonlinearity::base(double t) const {
  switch (kind) {
    case Kind::Torsion:
      return 1.0;
    case Kind::GelfandExp:
      return std::exp(t);
    case Kind::Power:
      return std::pow(1.0 + t, p);
  }
  return 1.0;
}

double Nonlinearity::base_prime(double t) const {
  switch (kind) {
    case Kind::Torsion:
      return 0.0;
    case Kind::GelfandExp:
      return std::exp(t);
    case Kind::Power:
      return p * std::pow(1.0 + t, p - 1.0);
  }
  return 0.0;
}

std::string Nonlinearity::describe() const {
  char buf[64];
  switch (kind) {
    case Kind::Torsion:
      return "torsion";
    case Kind::GelfandExp:
      std::snprintf(buf, sizeof(buf), "gelfand_exp(scale=%g)", scale);
      return buf;
    case Kind::Power:
      std::snprintf(buf, sizeof(buf), "power(p=%g,scale=%g)", p, scale);
      return buf;
  }
  return "?";
}

namespace {

// Gradients of the three barycentric basis functions on one triangle, times
// the doubled area: grad(phi_i) = perp(edge opposite i) / (2A).
struct ElementGeometry {
  double area;
  double bx[3], by[3];  // 2A * grad(phi_i)
};

ElementGeometry element_geometry(const Mesh& mesh, int t) {
  const Vec2 p0 = mesh.nodes[mesh.triangles[t][0]];
  const Vec2 p1 = mesh.nodes[mesh.triangles[t][1]];
  const Vec2 p2 = mesh.nodes[mesh.triangles[t][2]];
  ElementGeometry g;
  g.area = 0.5 * (p1 - p0).cross(p2 - p0);
  g.bx[0] = p1.y - p2.y;
  g.by[0] = p2.x - p1.x;
  g.bx[1] = p2.y - p0.y;
  g.by[1] = p0.x - p2.x;
  g.bx[2] = p0.y - p1.y;
  g.by[2] = p1.x - p0.x;
  return g;
}

}  // namespace

SparseMatrix stiffness(const Mesh& mesh) {
  std::vector<std::tuple<int, int, double>> trips;
  trips.reserve(mesh.triangle_count() * 9);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    const double inv4a = 1.0 / (4.0 * g.area);
    for (int i = 0; i < 3; ++i) {
      const int ni = mesh.triangles[t][i];
      trips.emplace_back(ni, ni, (g.bx[i] * g.bx[i] + g.by[i] * g.by[i]) * inv4a);
      for (int j = i + 1; j < 3; ++j) {
        const int nj = mesh.triangles[t][j];
        const double v = (g.bx[i] * g.bx[j] + g.by[i] * g.by[j]) * inv4a;
        trips.emplace_back(ni, nj, v);
        trips.emplace_back(nj, ni, v);
      }
    }
  }
  return SparseMatrix::from_triplets(mesh.node_count(), std::move(trips));
}

SparseMatrix interior_mass(const Mesh& mesh) {
  std::vector<std::tuple<int, int, double>> trips;
  trips.reserve(mesh.triangle_count() * 9);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double a = mesh.triangle_area(t);
    for (int i = 0; i < 3; ++i) {
      const int ni = mesh.triangles[t][i];
      trips.emplace_back(ni, ni, a / 6.0);
      for (int j = i + 1; j < 3; ++j) {
        const int nj = mesh.triangles[t][j];
        trips.emplace_back(ni, nj, a / 12.0);
        trips.emplace_back(nj, ni, a / 12.0);
      }
    }
  }
  return SparseMatrix::from_triplets(mesh.node_count(), std::move(trips));
}

SparseMatrix boundary_mass(const Mesh& mesh) {
  std::vector<std::tuple<int, int, double>> trips;
  trips.reserve(mesh.boundary_edges.size() * 4);
  for (const BoundaryEdge& e : mesh.boundary_edges) {
    const double l6 = e.length / 6.0;
    trips.emplace_back(e.i, e.i, 2.0 * l6);
    trips.emplace_back(e.j, e.j, 2.0 * l6);
    trips.emplace_back(e.i, e.j, l6);
    trips.emplace_back(e.j, e.i, l6);
  }
  return SparseMatrix::from_triplets(mesh.node_count(), std::move(trips));
}

SparseMatrix weighted_mass(const Mesh& mesh, const Field& w) {
  w.ensure_valid();
  if (w.mesh != &mesh) throw SolveError("weighted_mass: field on a different mesh");
  std::vector<std::tuple<int, int, double>> trips;
  trips.reserve(mesh.triangle_count() * 9);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double a = mesh.triangle_area(t);
    const int* nd = mesh.triangles[t].data();
    const double wv[3] = {w[nd[0]], w[nd[1]], w[nd[2]]};
    // Exact cubic moments of barycentric products:
    // int phi_i^3 = A/10, int phi_i^2 phi_j = A/30, int phi_i phi_j phi_k = A/60.
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3;
      const int k = (i + 2) % 3;
      const double dii = a * (wv[i] / 10.0 + (wv[j] + wv[k]) / 30.0);
      trips.emplace_back(nd[i], nd[i], dii);
      const double dij = a * ((wv[i] + wv[j]) / 30.0 + wv[k] / 60.0);
      trips.emplace_back(nd[i], nd[j], dij);
      trips.emplace_back(nd[j], nd[i], dij);
    }
  }
  return SparseMatrix::from_triplets(mesh.node_count(), std::move(trips));
}

Vector load(const Mesh& mesh, const Field& s) {
  s.ensure_valid();
  if (s.mesh != &mesh) throw SolveError("load: field on a different mesh");
  Vector out(mesh.node_count(), 0.0);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double a = mesh.triangle_area(t);
    const int* nd = mesh.triangles[t].data();
    const double sv[3] = {s[nd[0]], s[nd[1]], s[nd[2]]};
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3;
      const int k = (i + 2) % 3;
      out[nd[i]] += a * (2.0 * sv[i] + sv[j] + sv[k]) / 12.0;
    }
  }
  return out;
}

Vector load_constant(const Mesh& mesh, double s) {
  Field f(mesh, s);
  return load(mesh, f);
}

}  // namespace robinlab
