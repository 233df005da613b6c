#pragma once

#include <string>
#include <vector>

#include "robinlab/common.hpp"

namespace robinlab {

/// Smooth closed planar curve with trigonometric-polynomial coordinates
///   x(t) = sum_m cx_cos[m] cos(mt) + cx_sin[m] sin(mt),  t in [0, 2pi),
/// and likewise for y(t). Closed and C-infinity by construction; verified
/// simple and positively oriented (interior on the left of the tangent).
class BoundaryCurve {
 public:
  BoundaryCurve(std::vector<double> cx_cos, std::vector<double> cx_sin,
                std::vector<double> cy_cos, std::vector<double> cy_sin);

  int degree() const { return static_cast<int>(cx_cos_.size()) - 1; }

  Vec2 point(double t) const;
  Vec2 derivative(double t) const;
  Vec2 second_derivative(double t) const;
  double curvature(double t) const;

  const std::vector<double>& cx_cos() const { return cx_cos_; }
  const std::vector<double>& cx_sin() const { return cx_sin_; }
  const std::vector<double>& cy_cos() const { return cy_cos_; }
  const std::vector<double>& cy_sin() const { return cy_sin_; }

  /// Coefficient table, one row per harmonic: m cx_cos cx_sin cy_cos cy_sin.
  void write_coefficients(const std::string& path) const;
  static BoundaryCurve read_coefficients(const std::string& path);

 private:
  std::vector<double> cx_cos_, cx_sin_, cy_cos_, cy_sin_;
};

struct DomainSpec {
  enum class Family { Disk, Ellipse, CorrugatedStrip };

  Family family = Family::Disk;
  double radius = 1.0;          // disk
  double a = 2.0, b = 1.0;      // ellipse semi-axes, a >= b > 0
  double length = 6.0;          // corrugated strip half-length L
  double delta = 0.08;          // corrugation amplitude
  int waves = 3;                // corrugation count k >= 1
  int smoothing_degree = 40;    // trig projection degree N >= 8
  Vec2 center;                  // translation applied to the whole curve

  static DomainSpec disk(double R, Vec2 center = {});
  static DomainSpec ellipse(double a, double b, Vec2 center = {});
  static DomainSpec corrugated_strip(double L, double delta, int k, int N = 40,
                                     Vec2 center = {});

  void validate() const;
  std::string describe() const;

  /// Parses "disk(1)", "ellipse(2,1)", "corrugated_strip(6,0.08,3,40)".
  static DomainSpec parse(const std::string& text);
};

struct CurveSample {
  double t = 0.0;
  Vec2 point;
  Vec2 tangent;  // unit
  Vec2 normal;   // outer unit, tangent rotated -90 degrees
  double kappa = 0.0;
  double speed = 0.0;  // |gamma'(t)|
};

struct ConvexityReport {
  double min_kappa = 0.0;
  double argmin_t = 0.0;
  int sign_changes = 0;
};

struct GeometricMeasures {
  double area = 0.0;
  double perimeter = 0.0;
};

BoundaryCurve make_domain(const DomainSpec& spec);

CurveSample sample(const BoundaryCurve& curve, double t);

ConvexityReport convexity_report(const BoundaryCurve& curve, int nsamples);

/// Area by the shoelace line integral and perimeter by arclength quadrature,
/// both to relative accuracy 1e-10.
GeometricMeasures geometric_measures(const BoundaryCurve& curve);

/// True when (gamma(t) - c) . nu(t) > 0 at all of nsamples parameters.
bool is_star_shaped(const BoundaryCurve& curve, Vec2 center, int nsamples);

/// Total turning integral of kappa ds around the loop (2*pi for any simple
/// positively oriented curve).
double total_turning(const BoundaryCurve& curve);

/// Signed polygon test against a sampled polyline of the curve.
bool curve_is_simple(const BoundaryCurve& curve, int nsamples);

}  // namespace robinlab
