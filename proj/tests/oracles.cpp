#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace oracles {
namespace {

// Bisection to near machine precision; f must change sign over [lo, hi].
template <typename F>
double bisect(F f, double lo, double hi) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  if (flo * f(hi) > 0.0) throw std::runtime_error("oracle bisection: no sign change");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if (flo * fm < 0.0) {
      hi = mid;
    } else {
      lo = mid;
      flo = fm;
    }
    if (hi - lo <= 1e-15 * (1.0 + hi)) break;
  }
  return 0.5 * (lo + hi);
}

double j0(double x) { return std::cyl_bessel_j(0.0, x); }
double j1(double x) { return std::cyl_bessel_j(1.0, x); }

// lambda(s) = 8 s (1-s) exp(-4 s / beta); beta may be +infinity.
double liouville_lambda(double s, double beta) {
  const double decay = std::isinf(beta) ? 1.0 : std::exp(-4.0 * s / beta);
  return 8.0 * s * (1.0 - s) * decay;
}

// d lambda / d s, up to the positive factor 8 exp(-4s/beta).
double liouville_lambda_slope(double s, double beta) {
  const double corr = std::isinf(beta) ? 0.0 : 4.0 * s * (1.0 - s) / beta;
  return (1.0 - 2.0 * s) - corr;
}

// Maximizer of lambda(s): the slope is positive at 0+ and negative at 1/2.
double liouville_argmax(double beta) {
  return bisect([beta](double s) { return liouville_lambda_slope(s, beta); }, 1e-12,
                0.5);
}

}  // namespace

double bessel_j0_first_zero() {
  return bisect(j0, 2.0, 3.0);
}

double disk_dirichlet_eigenvalue() {
  const double z = bessel_j0_first_zero();
  return z * z;
}

double disk_robin_eigenvalue(double beta) {
  if (beta <= 0.0) throw std::runtime_error("oracle: beta must be positive");
  // x J1(x)/J0(x) increases from 0 to +inf on (0, j01), so the characteristic
  // function sqrt(l) J1 - beta J0 has exactly one root below j01^2.
  const double hi = disk_dirichlet_eigenvalue() - 1e-12;
  auto chi = [beta](double lam) {
    const double x = std::sqrt(lam);
    return x * j1(x) - beta * j0(x);
  };
  return bisect(chi, 1e-12, hi);
}

double ellipse_perimeter(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b <= 0.0) throw std::runtime_error("oracle: degenerate ellipse");
  // Complete elliptic integral of the second kind by the AGM:
  //   K(m) = pi / (2 agm(1, sqrt(1-m))),
  //   E(m) = K(m) (1 - sum_n 2^{n-1} c_n^2),  c_0 = sqrt(m), c_{n+1} = (a_n-b_n)/2.
  const double m = 1.0 - (b / a) * (b / a);
  double an = 1.0;
  double bn = std::sqrt(1.0 - m);
  double cn2 = m;      // c_0^2
  double sum = 0.5 * cn2;  // 2^{-1} c_0^2
  double pow2 = 1.0;
  for (int it = 0; it < 64 && std::abs(an - bn) > 1e-17 * an; ++it) {
    const double c = 0.5 * (an - bn);
    const double a_next = 0.5 * (an + bn);
    bn = std::sqrt(an * bn);
    an = a_next;
    cn2 = c * c;
    sum += pow2 * cn2;  // 2^{n-1} c_n^2 with n >= 1
    pow2 *= 2.0;
  }
  const double K = std::acos(-1.0) / (2.0 * an);
  const double E = K * (1.0 - sum);
  return 4.0 * a * E;
}

double disk_torsion_value(double r, double beta) {
  return 0.25 * (1.0 - r * r) + 0.5 / beta;
}

double disk_exp_lambda_star(double beta) {
  return liouville_lambda(liouville_argmax(beta), beta);
}

double disk_exp_center_value(double beta, double lambda) {
  const double smax = liouville_argmax(beta);
  if (!(lambda > 0.0) || lambda >= liouville_lambda(smax, beta)) {
    throw std::runtime_error("oracle: lambda outside the minimal-branch range");
  }
  // lambda(s) increases from 0 to lambda* on (0, smax]; take the smallest root.
  const double s = bisect(
      [beta, lambda](double t) { return liouville_lambda(t, beta) - lambda; }, 1e-300,
      smax);
  const double c2 = s / (1.0 - s);
  return std::log(8.0 * c2 / lambda);
}

}  // namespace oracles
