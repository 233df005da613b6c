#pragma once

// Reference values computed independently of the library under test: Bessel
// roots for disk eigenvalues, the arithmetic-geometric mean for ellipse
// perimeters, the radial Liouville family for the exponential problem on the
// unit disk, and the closed-form disk torsion function. Everything here is
// self-contained (bisection + <cmath> special functions) so a test failure
// always indicts the library, not the oracle.

namespace oracles {

// First positive zero of the Bessel function J0 (~2.404825557695773).
double bessel_j0_first_zero();

// Principal Dirichlet eigenvalue of the unit disk: (first J0 zero)^2.
double disk_dirichlet_eigenvalue();

// First Robin eigenvalue of the unit disk: the unique root of
//   sqrt(l) J1(sqrt(l)) = beta J0(sqrt(l))   in (0, j01^2).
double disk_robin_eigenvalue(double beta);

// Exact ellipse perimeter 4a E(m), m = 1 - (b/a)^2, via the
// arithmetic-geometric mean evaluation of the elliptic integral E.
double ellipse_perimeter(double a, double b);

// Robin torsion function of the unit disk: u(r) = (1 - r^2)/4 + 1/(2 beta).
double disk_torsion_value(double r, double beta);

// The radial solutions of -Lap u = lambda e^u on the unit disk form the
// Liouville family u(r) = log(8 c^2 / (lambda (1 + c^2 r^2)^2)).  Imposing
// u'(1) + beta u(1) = 0 and substituting s = c^2/(1+c^2) gives
//   lambda(s) = 8 s (1 - s) exp(-4 s / beta),  s in (0,1),
// so the extremal parameter is max_s lambda(s) and the minimal solution at a
// given lambda corresponds to the smallest root s of lambda(s) = lambda.
// beta = +infinity reproduces the Dirichlet values (lambda* = 2).
double disk_exp_lambda_star(double beta);

// Center value u(0) = log(8 c^2 / lambda), c^2 = s/(1-s), of the minimal
// radial solution; requires 0 < lambda < disk_exp_lambda_star(beta).
double disk_exp_center_value(double beta, double lambda);

}  // namespace oracles
