#pragma once

#include <string>

#include "robinlab/linalg.hpp"
#include "robinlab/mesh.hpp"

namespace robinlab {

// Nodal scalar field on a mesh (piecewise-linear interpolant).
struct Field {
  const Mesh* mesh = nullptr;
  Vector values;

  Field() = default;
  explicit Field(const Mesh& m, double fill = 0.0)
      : mesh(&m), values(m.node_count(), fill) {}
  Field(const Mesh& m, Vector v) : mesh(&m), values(std::move(v)) { ensure_valid(); }

  int size() const { return static_cast<int>(values.size()); }
  double& operator[](int i) { return values[i]; }
  double operator[](int i) const { return values[i]; }

  void ensure_valid() const;  // throws SolveError on size mismatch / non-finite
  double max_value() const;
  double min_value() const;
  double sup_norm() const;
  int argmax() const;
  Vec2 argmax_location() const;
};

// Right-hand sides f(t) = scale * g(t) for -Lap u = f(u). The admissible kinds
// guarantee g(0) > 0, g' >= 0, f >= 0 on t >= 0 by construction.
struct Nonlinearity {
  enum class Kind { Torsion, GelfandExp, Power };

  Kind kind = Kind::Torsion;
  double p = 2.0;      // exponent for the Power kind, g(t) = (1+t)^p
  double scale = 1.0;  // multiplicative lambda baked into f

  static Nonlinearity torsion() { return {}; }
  static Nonlinearity gelfand_exp(double lambda = 1.0) {
    return {Kind::GelfandExp, 2.0, lambda};
  }
  static Nonlinearity power(double p, double lambda = 1.0);
  Nonlinearity with_scale(double lambda) const {
    Nonlinearity g = *this;
    g.scale = lambda;
    return g;
  }

  double base(double t) const;        // g(t)
  double base_prime(double t) const;  // g'(t)
  double f(double t) const { return scale * base(t); }
  double fprime(double t) const { return scale * base_prime(t); }
  std::string describe() const;
};

// P1 finite-element operators. All results are symmetric CSR matrices built
// with exact per-element quadrature.
SparseMatrix stiffness(const Mesh& mesh);                       // grad-grad
SparseMatrix interior_mass(const Mesh& mesh);                   // L2 pairing
SparseMatrix boundary_mass(const Mesh& mesh);                   // boundary L2
SparseMatrix weighted_mass(const Mesh& mesh, const Field& w);   // w-weighted L2
Vector load(const Mesh& mesh, const Field& s);                  // source pairing
Vector load_constant(const Mesh& mesh, double s);

}  // namespace robinlab
