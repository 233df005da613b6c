#include "robinlab/geometry.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace robinlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double eval_trig(const std::vector<double>& c_cos, const std::vector<double>& c_sin,
                 double t, int deriv) {
  double acc = 0.0;
  const int deg = static_cast<int>(c_cos.size()) - 1;
  for (int m = 0; m <= deg; ++m) {
    const double a = c_cos[m];
    const double b = c_sin[m];
    if (a == 0.0 && b == 0.0) continue;
    const double mm = static_cast<double>(m);
    const double c = std::cos(mm * t);
    const double s = std::sin(mm * t);
    switch (deriv) {
      case 0:
        acc += a * c + b * s;
        break;
      case 1:
        acc += mm * (-a * s + b * c);
        break;
      case 2:
        acc += mm * mm * (-a * c - b * s);
        break;
      default:
        break;
    }
  }
  return acc;
}

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const auto orient = [](Vec2 a, Vec2 b, Vec2 c) {
    return (b - a).cross(c - a);
  };
  const double o1 = orient(p1, p2, q1);
  const double o2 = orient(p1, p2, q2);
  const double o3 = orient(q1, q2, p1);
  const double o4 = orient(q1, q2, p2);
  return (o1 * o2 < 0.0) && (o3 * o4 < 0.0);
}

}  // namespace

BoundaryCurve::BoundaryCurve(std::vector<double> cx_cos, std::vector<double> cx_sin,
                             std::vector<double> cy_cos, std::vector<double> cy_sin)
    : cx_cos_(std::move(cx_cos)),
      cx_sin_(std::move(cx_sin)),
      cy_cos_(std::move(cy_cos)),
      cy_sin_(std::move(cy_sin)) {
  const size_t n = cx_cos_.size();
  if (n == 0 || cx_sin_.size() != n || cy_cos_.size() != n || cy_sin_.size() != n)
    throw GeometryError("boundary curve: coefficient arrays must share one length");
}

Vec2 BoundaryCurve::point(double t) const {
  return {eval_trig(cx_cos_, cx_sin_, t, 0), eval_trig(cy_cos_, cy_sin_, t, 0)};
}

Vec2 BoundaryCurve::derivative(double t) const {
  return {eval_trig(cx_cos_, cx_sin_, t, 1), eval_trig(cy_cos_, cy_sin_, t, 1)};
}

Vec2 BoundaryCurve::second_derivative(double t) const {
  return {eval_trig(cx_cos_, cx_sin_, t, 2), eval_trig(cy_cos_, cy_sin_, t, 2)};
}

double BoundaryCurve::curvature(double t) const {
  const Vec2 d1 = derivative(t);
  const Vec2 d2 = second_derivative(t);
  const double sp = d1.norm();
  return d1.cross(d2) / (sp * sp * sp);
}

void BoundaryCurve::write_coefficients(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "# m cx_cos cx_sin cy_cos cy_sin\n";
  char buf[160];
  for (size_t m = 0; m < cx_cos_.size(); ++m) {
    std::snprintf(buf, sizeof(buf), "%zu %.17g %.17g %.17g %.17g\n", m, cx_cos_[m],
                  cx_sin_[m], cy_cos_[m], cy_sin_[m]);
    out << buf;
  }
}

BoundaryCurve BoundaryCurve::read_coefficients(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<double> xc, xs, yc, ys;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    size_t m;
    double a, b, c, d;
    if (!(row >> m >> a >> b >> c >> d))
      throw IoError("malformed coefficient row in " + path + ": " + line);
    if (m != xc.size()) throw IoError("non-contiguous harmonic index in " + path);
    xc.push_back(a);
    xs.push_back(b);
    yc.push_back(c);
    ys.push_back(d);
  }
  return BoundaryCurve(xc, xs, yc, ys);
}

DomainSpec DomainSpec::disk(double R, Vec2 center) {
  DomainSpec s;
  s.family = Family::Disk;
  s.radius = R;
  s.center = center;
  return s;
}

DomainSpec DomainSpec::ellipse(double a, double b, Vec2 center) {
  DomainSpec s;
  s.family = Family::Ellipse;
  s.a = a;
  s.b = b;
  s.center = center;
  return s;
}

DomainSpec DomainSpec::corrugated_strip(double L, double delta, int k, int N,
                                        Vec2 center) {
  DomainSpec s;
  s.family = Family::CorrugatedStrip;
  s.length = L;
  s.delta = delta;
  s.waves = k;
  s.smoothing_degree = N;
  s.center = center;
  return s;
}

void DomainSpec::validate() const {
  switch (family) {
    case Family::Disk:
      if (!(radius > 0.0)) throw GeometryError("disk: radius must be positive");
      break;
    case Family::Ellipse:
      if (!(a >= b && b > 0.0))
        throw GeometryError("ellipse: semi-axes must satisfy a >= b > 0");
      break;
    case Family::CorrugatedStrip:
      if (!(length > 0.0)) throw GeometryError("corrugated_strip: L must be positive");
      if (!(delta > 0.0))
        throw GeometryError("corrugated_strip: delta must be positive");
      if (waves < 1) throw GeometryError("corrugated_strip: k must be >= 1");
      if (smoothing_degree < 8)
        throw GeometryError("corrugated_strip: smoothing degree must be >= 8");
      break;
  }
}

std::string DomainSpec::describe() const {
  char buf[128];
  switch (family) {
    case Family::Disk:
      std::snprintf(buf, sizeof(buf), "disk(%g)", radius);
      break;
    case Family::Ellipse:
      std::snprintf(buf, sizeof(buf), "ellipse(%g,%g)", a, b);
      break;
    case Family::CorrugatedStrip:
      std::snprintf(buf, sizeof(buf), "corrugated_strip(%g,%g,%d,%d)", length, delta,
                    waves, smoothing_degree);
      break;
  }
  return buf;
}

DomainSpec DomainSpec::parse(const std::string& text) {
  const auto open = text.find('(');
  const auto close = text.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw ConfigError("domain spec must look like family(args): " + text);
  const std::string name = text.substr(0, open);
  std::vector<double> args;
  std::string body = text.substr(open + 1, close - open - 1);
  std::replace(body.begin(), body.end(), ',', ' ');
  std::istringstream in(body);
  double v;
  while (in >> v) args.push_back(v);
  DomainSpec spec;
  if (name == "disk") {
    if (args.size() != 1) throw ConfigError("disk takes one argument: " + text);
    spec = disk(args[0]);
  } else if (name == "ellipse") {
    if (args.size() != 2) throw ConfigError("ellipse takes two arguments: " + text);
    spec = ellipse(args[0], args[1]);
  } else if (name == "corrugated_strip" || name == "corrugated") {
    if (args.size() < 3 || args.size() > 4)
      throw ConfigError("corrugated_strip takes L,delta,k[,N]: " + text);
    const int N = args.size() == 4 ? static_cast<int>(args[3]) : 40;
    spec = corrugated_strip(args[0], args[1], static_cast<int>(args[2]), N);
  } else {
    throw ConfigError("unknown domain family: " + name);
  }
  spec.validate();  // reject well-formed but invalid specs at the parse boundary
  return spec;
}

namespace {

// Piecewise target for the corrugated stadium: bottom edge, right cap, the
// corrugated top edge y = 1 + delta*cos(k*pi*x/L) and the left cap. The caps
// span the local edge heights so the target is closed and C^1; its degree-N
// trigonometric projection is the returned curve.
class CorrugatedTarget {
 public:
  CorrugatedTarget(double L, double delta, int k)
      : L_(L), delta_(delta), k_(k), cap_height_(1.0 + delta * std::cos(k * std::numbers::pi)) {
    const double bottom = 2.0 * L_;
    const double cap = std::numbers::pi * cap_height_ / 2.0;
    double top = 0.0;
    const int m = 2048;
    for (int i = 0; i < m; ++i) {
      const double x0 = L_ - 2.0 * L_ * i / m;
      const double x1 = L_ - 2.0 * L_ * (i + 1) / m;
      top += std::hypot(x1 - x0, top_y(x1) - top_y(x0));
    }
    cum_[0] = 0.0;
    cum_[1] = bottom;
    cum_[2] = bottom + cap;
    cum_[3] = bottom + cap + top;
    cum_[4] = bottom + cap + top + cap;
  }

  Vec2 at(double theta) const {
    const double s = theta / kTwoPi * cum_[4];
    if (s < cum_[1]) {
      const double f = s / cum_[1];
      return {-L_ + 2.0 * L_ * f, 0.0};
    }
    if (s < cum_[2]) {
      const double f = (s - cum_[1]) / (cum_[2] - cum_[1]);
      const double phi = -std::numbers::pi / 2.0 + std::numbers::pi * f;
      const double r = cap_height_ / 2.0;
      return {L_ + r * std::cos(phi), cap_height_ / 2.0 + r * std::sin(phi)};
    }
    if (s < cum_[3]) {
      const double f = (s - cum_[2]) / (cum_[3] - cum_[2]);
      const double x = L_ - 2.0 * L_ * f;
      return {x, top_y(x)};
    }
    const double f = (s - cum_[3]) / (cum_[4] - cum_[3]);
    const double phi = std::numbers::pi / 2.0 + std::numbers::pi * f;
    const double r = cap_height_ / 2.0;
    return {-L_ + r * std::cos(phi), cap_height_ / 2.0 + r * std::sin(phi)};
  }

 private:
  double top_y(double x) const {
    return 1.0 + delta_ * std::cos(k_ * std::numbers::pi * x / L_);
  }

  double L_, delta_;
  int k_;
  double cap_height_;
  double cum_[5];
};

BoundaryCurve project_onto_harmonics(const CorrugatedTarget& target, int degree,
                                     Vec2 center) {
  const int m = std::max(4096, 8 * degree);
  std::vector<double> xs(m), ys(m);
  for (int i = 0; i < m; ++i) {
    const Vec2 p = target.at(kTwoPi * i / m);
    xs[i] = p.x;
    ys[i] = p.y;
  }
  std::vector<double> xc(degree + 1, 0.0), xsn(degree + 1, 0.0), yc(degree + 1, 0.0),
      ysn(degree + 1, 0.0);
  for (int h = 0; h <= degree; ++h) {
    double axc = 0.0, axs = 0.0, ayc = 0.0, ays = 0.0;
    for (int i = 0; i < m; ++i) {
      const double ang = kTwoPi * h * i / m;
      const double c = std::cos(ang);
      const double s = std::sin(ang);
      axc += xs[i] * c;
      axs += xs[i] * s;
      ayc += ys[i] * c;
      ays += ys[i] * s;
    }
    const double scale = (h == 0 ? 1.0 : 2.0) / m;
    xc[h] = axc * scale;
    xsn[h] = axs * scale;
    yc[h] = ayc * scale;
    ysn[h] = ays * scale;
  }
  xc[0] += center.x;
  yc[0] += center.y;
  return BoundaryCurve(xc, xsn, yc, ysn);
}

void verify_simple_and_oriented(const BoundaryCurve& curve, const std::string& what) {
  const int n = 1024;
  double area2 = 0.0;
  double min_speed = 1e300;
  for (int i = 0; i < n; ++i) {
    const double t = kTwoPi * i / n;
    const Vec2 p = curve.point(t);
    const Vec2 q = curve.point(kTwoPi * (i + 1) / n);
    area2 += p.cross(q);
    min_speed = std::min(min_speed, curve.derivative(t).norm());
  }
  if (min_speed < 1e-9)
    throw GeometryError(what + ": near-degenerate parameterization (|gamma'| ~ 0)");
  if (!(area2 > 0.0))
    throw GeometryError(what + ": curve is not positively oriented");
  if (!curve_is_simple(curve, n))
    throw GeometryError(what +
                        ": projected curve self-intersects; raise the smoothing "
                        "degree N or lower delta");
}

}  // namespace

BoundaryCurve make_domain(const DomainSpec& spec) {
  spec.validate();
  switch (spec.family) {
    case DomainSpec::Family::Disk: {
      std::vector<double> xc{spec.center.x, spec.radius}, xs{0.0, 0.0},
          yc{spec.center.y, 0.0}, ys{0.0, spec.radius};
      return BoundaryCurve(xc, xs, yc, ys);
    }
    case DomainSpec::Family::Ellipse: {
      std::vector<double> xc{spec.center.x, spec.a}, xs{0.0, 0.0},
          yc{spec.center.y, 0.0}, ys{0.0, spec.b};
      return BoundaryCurve(xc, xs, yc, ys);
    }
    case DomainSpec::Family::CorrugatedStrip: {
      CorrugatedTarget target(spec.length, spec.delta, spec.waves);
      BoundaryCurve curve =
          project_onto_harmonics(target, spec.smoothing_degree, spec.center);
      verify_simple_and_oriented(curve, spec.describe());
      const Vec2 star_center = spec.center + Vec2{0.0, 0.5};
      if (!is_star_shaped(curve, star_center, 2048))
        throw GeometryError(spec.describe() +
                            ": projection lost star-shapedness; raise N or lower delta");
      const ConvexityReport rep = convexity_report(curve, 2048);
      if (!(rep.min_kappa < 0.0))
        throw GeometryError(spec.describe() +
                            ": corrugation too weak to produce negative curvature");
      return curve;
    }
  }
  throw GeometryError("unreachable domain family");
}

CurveSample sample(const BoundaryCurve& curve, double t) {
  if (!std::isfinite(t)) throw GeometryError("sample: parameter must be finite");
  CurveSample s;
  s.t = t;
  s.point = curve.point(t);
  const Vec2 d1 = curve.derivative(t);
  s.speed = d1.norm();
  if (s.speed < 1e-12)
    throw GeometryError("sample: degenerate parameterization, |gamma'(t)| < 1e-12");
  s.tangent = d1 * (1.0 / s.speed);
  s.normal = s.tangent.rotated_cw();
  s.kappa = curve.curvature(t);
  return s;
}

ConvexityReport convexity_report(const BoundaryCurve& curve, int nsamples) {
  if (nsamples < 256) throw GeometryError("convexity_report: nsamples must be >= 256");
  ConvexityReport rep;
  std::vector<double> kappa(nsamples);
  rep.min_kappa = 1e300;
  for (int i = 0; i < nsamples; ++i) {
    const double t = kTwoPi * i / nsamples;
    kappa[i] = curve.curvature(t);
    if (kappa[i] < rep.min_kappa) {
      rep.min_kappa = kappa[i];
      rep.argmin_t = t;
    }
  }
  for (int i = 0; i < nsamples; ++i) {
    if (kappa[i] * kappa[(i + 1) % nsamples] < 0.0) ++rep.sign_changes;
  }
  return rep;
}

GeometricMeasures geometric_measures(const BoundaryCurve& curve) {
  // Periodic trapezoid rule, doubled until both integrals settle to 1e-10.
  GeometricMeasures prev{0.0, 0.0};
  for (int m = 256; m <= (1 << 21); m *= 2) {
    GeometricMeasures cur{0.0, 0.0};
    for (int i = 0; i < m; ++i) {
      const double t = kTwoPi * i / m;
      const Vec2 p = curve.point(t);
      const Vec2 d = curve.derivative(t);
      cur.area += p.cross(d);
      cur.perimeter += d.norm();
    }
    cur.area *= 0.5 * kTwoPi / m;
    cur.perimeter *= kTwoPi / m;
    if (m > 256) {
      const double ea = std::abs(cur.area - prev.area);
      const double ep = std::abs(cur.perimeter - prev.perimeter);
      if (ea <= 1e-10 * std::abs(cur.area) && ep <= 1e-10 * cur.perimeter) return cur;
    }
    prev = cur;
  }
  return prev;
}

bool is_star_shaped(const BoundaryCurve& curve, Vec2 center, int nsamples) {
  for (int i = 0; i < nsamples; ++i) {
    const double t = kTwoPi * i / nsamples;
    const CurveSample s = sample(curve, t);
    if ((s.point - center).dot(s.normal) <= 0.0) return false;
  }
  return true;
}

double total_turning(const BoundaryCurve& curve) {
  double prev = 0.0;
  for (int m = 512; m <= (1 << 20); m *= 2) {
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      const double t = kTwoPi * i / m;
      const Vec2 d1 = curve.derivative(t);
      const Vec2 d2 = curve.second_derivative(t);
      acc += d1.cross(d2) / d1.dot(d1);
    }
    acc *= kTwoPi / m;
    if (m > 512 && std::abs(acc - prev) <= 1e-12 * std::abs(acc)) return acc;
    prev = acc;
  }
  return prev;
}

bool curve_is_simple(const BoundaryCurve& curve, int nsamples) {
  std::vector<Vec2> pts(nsamples);
  for (int i = 0; i < nsamples; ++i) pts[i] = curve.point(kTwoPi * i / nsamples);
  for (int i = 0; i < nsamples; ++i) {
    const Vec2 a0 = pts[i];
    const Vec2 a1 = pts[(i + 1) % nsamples];
    for (int j = i + 2; j < nsamples; ++j) {
      if (i == 0 && j == nsamples - 1) continue;  // adjacent through the seam
      if (segments_intersect(a0, a1, pts[j], pts[(j + 1) % nsamples])) return false;
    }
  }
  return true;
}

}  // namespace robinlab
