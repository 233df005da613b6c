#include "robinlab/critpoints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "robinlab/linalg.hpp"

namespace robinlab {
namespace {

void require_field_on(const Mesh& mesh, const Field& u) {
  if (u.mesh != &mesh) throw SolveError("field does not belong to this mesh");
  u.ensure_valid();
}

// A component "spans zero" over a node set when it takes values on both sides
// (touching zero on one side counts; an identically zero component does not).
bool sign_spans(double lo, double hi) {
  return (lo < 0.0 && hi >= 0.0) || (lo <= 0.0 && hi > 0.0);
}

std::vector<std::vector<int>> node_neighbors(const Mesh& mesh) {
  std::vector<std::vector<int>> nbr(mesh.node_count());
  for (const auto& tri : mesh.triangles)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (a != b) nbr[tri[a]].push_back(tri[b]);
  for (auto& list : nbr) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return nbr;
}

std::vector<int> expand_ring(const std::vector<std::vector<int>>& nbr,
                             const std::vector<int>& nodes) {
  std::vector<int> out = nodes;
  for (const int v : nodes)
    out.insert(out.end(), nbr[v].begin(), nbr[v].end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool barycentric(const Mesh& mesh, int t, Vec2 p, std::array<double, 3>& lam) {
  const Vec2 a = mesh.nodes[mesh.triangles[t][0]];
  const Vec2 b = mesh.nodes[mesh.triangles[t][1]];
  const Vec2 c = mesh.nodes[mesh.triangles[t][2]];
  const double d = (b - a).cross(c - a);
  if (!(d > 0.0)) return false;
  lam[0] = (b - p).cross(c - p) / d;
  lam[1] = (c - p).cross(a - p) / d;
  lam[2] = (a - p).cross(b - p) / d;
  const double tol = -1e-10;
  return lam[0] >= tol && lam[1] >= tol && lam[2] >= tol;
}

double wrap_angle(double a) {
  while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
  while (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

}  // namespace

const char* CriticalPoint::kind_name(Kind k) {
  switch (k) {
    case Kind::Max: return "max";
    case Kind::Min: return "min";
    case Kind::Saddle: return "saddle";
    case Kind::Degenerate: return "degenerate";
  }
  return "?";
}

Classification classify_hessian(double hxx, double hxy, double hyy) {
  Classification c;
  c.det = hxx * hyy - hxy * hxy;
  c.trace = hxx + hyy;
  const double disc = std::sqrt(std::max(0.0, (hxx - hyy) * (hxx - hyy) + 4.0 * hxy * hxy));
  const double e1 = 0.5 * (c.trace + disc);
  const double e2 = 0.5 * (c.trace - disc);
  const double scale = 0.25 * (std::abs(e1) + std::abs(e2)) * (std::abs(e1) + std::abs(e2));
  const double tol_deg = 1e-3 * scale;
  if (!(std::abs(c.det) >= tol_deg) || scale == 0.0) {
    c.kind = CriticalPoint::Kind::Degenerate;
    c.index = 0;
  } else if (c.det < 0.0) {
    c.kind = CriticalPoint::Kind::Saddle;
    c.index = -1;
  } else if (c.trace < 0.0) {
    c.kind = CriticalPoint::Kind::Max;
    c.index = +1;
  } else {
    c.kind = CriticalPoint::Kind::Min;
    c.index = +1;
  }
  return c;
}

int CritCensus::count(CriticalPoint::Kind k) const {
  int n = 0;
  for (const CriticalPoint& p : points)
    if (p.kind == k) ++n;
  return n;
}

std::string CritCensus::signature() const {
  std::string out;
  const auto add = [&](CriticalPoint::Kind k) {
    const int n = count(k);
    if (n == 0) return;
    if (!out.empty()) out += ' ';
    out += CriticalPoint::kind_name(k);
    out += ':';
    out += std::to_string(n);
  };
  add(CriticalPoint::Kind::Max);
  add(CriticalPoint::Kind::Min);
  add(CriticalPoint::Kind::Saddle);
  add(CriticalPoint::Kind::Degenerate);
  return out.empty() ? "none" : out;
}

std::vector<Vec2> recover_gradient(const Mesh& mesh, const Field& u) {
  require_field_on(mesh, u);
  std::vector<Vec2> grad(mesh.node_count(), Vec2{0.0, 0.0});
  std::vector<double> weight(mesh.node_count(), 0.0);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec2 p0 = mesh.nodes[tri[0]];
    const Vec2 p1 = mesh.nodes[tri[1]];
    const Vec2 p2 = mesh.nodes[tri[2]];
    const double twoA = (p1 - p0).cross(p2 - p0);
    Vec2 g{0.0, 0.0};
    const Vec2 pts[3] = {p0, p1, p2};
    for (int i = 0; i < 3; ++i) {
      const Vec2 d = pts[(i + 1) % 3] - pts[(i + 2) % 3];
      const Vec2 grad_phi = d.rotated_cw() * (1.0 / twoA);
      g += grad_phi * u[tri[i]];
    }
    const double area = 0.5 * twoA;
    for (const int v : tri) {
      grad[v] += g * area;
      weight[v] += area;
    }
  }
  for (int i = 0; i < mesh.node_count(); ++i) grad[i] = grad[i] * (1.0 / weight[i]);
  return grad;
}

std::vector<CriticalPoint> locate_critical_points(const Mesh& mesh, const Field& u) {
  require_field_on(mesh, u);
  const std::vector<Vec2> g = recover_gradient(mesh, u);
  const std::vector<std::vector<int>> nbr = node_neighbors(mesh);
  const std::vector<std::vector<int>> inc = node_triangle_adjacency(mesh);

  std::vector<CriticalPoint> raw;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    double gx_lo = g[tri[0]].x, gx_hi = gx_lo;
    double gy_lo = g[tri[0]].y, gy_hi = gy_lo;
    for (int k = 1; k < 3; ++k) {
      gx_lo = std::min(gx_lo, g[tri[k]].x);
      gx_hi = std::max(gx_hi, g[tri[k]].x);
      gy_lo = std::min(gy_lo, g[tri[k]].y);
      gy_hi = std::max(gy_hi, g[tri[k]].y);
    }
    if (!sign_spans(gx_lo, gx_hi) || !sign_spans(gy_lo, gy_hi)) continue;

    std::vector<int> patch = {tri[0], tri[1], tri[2]};
    std::sort(patch.begin(), patch.end());
    patch = expand_ring(nbr, expand_ring(nbr, patch));
    if (patch.size() < 6) patch = expand_ring(nbr, patch);
    if (patch.size() < 6) continue;

    const Vec2 centroid =
        (mesh.nodes[tri[0]] + mesh.nodes[tri[1]] + mesh.nodes[tri[2]]) * (1.0 / 3.0);
    double ms = 0.0;
    for (const int v : patch) {
      const Vec2 d = mesh.nodes[v] - centroid;
      ms += d.dot(d);
    }
    const double scale = std::sqrt(ms / static_cast<double>(patch.size()));
    if (!(scale > 0.0)) continue;

    // Least squares for u ~ c0 + c1 X + c2 Y + c3 X^2 + c4 XY + c5 Y^2 in
    // centered, scaled coordinates (normal equations, 6x6).
    std::array<double, 36> ata{};
    std::array<double, 6> atb{};
    for (const int v : patch) {
      const Vec2 d = (mesh.nodes[v] - centroid) * (1.0 / scale);
      const double phi[6] = {1.0, d.x, d.y, d.x * d.x, d.x * d.y, d.y * d.y};
      for (int a = 0; a < 6; ++a) {
        atb[a] += phi[a] * u[v];
        for (int b = 0; b < 6; ++b) ata[6 * a + b] += phi[a] * phi[b];
      }
    }
    Vector coef;
    try {
      coef = solve_dense(6, Vector(ata.begin(), ata.end()), Vector(atb.begin(), atb.end()));
    } catch (const SolveError&) {
      continue;  // singular patch geometry; candidate unusable
    }

    const double hs_xx = 2.0 * coef[3], hs_xy = coef[4], hs_yy = 2.0 * coef[5];
    const double det = hs_xx * hs_yy - hs_xy * hs_xy;
    const double hscale = std::max({std::abs(hs_xx), std::abs(hs_xy), std::abs(hs_yy)});
    Vec2 pos = centroid;
    if (std::abs(det) > 1e-12 * hscale * hscale) {
      const double sx = (-coef[1] * hs_yy + coef[2] * hs_xy) / det;
      const double sy = (-coef[2] * hs_xx + coef[1] * hs_xy) / det;
      pos = centroid + Vec2{sx, sy} * scale;
    }
    if ((pos - centroid).norm() > 5.0 * mesh.h) continue;
    if (!point_inside(mesh, pos)) continue;

    CriticalPoint cp;
    cp.position = pos;
    cp.hessian = {hs_xx / (scale * scale), hs_xy / (scale * scale),
                  hs_yy / (scale * scale)};
    const Classification cls =
        classify_hessian(cp.hessian[0], cp.hessian[1], cp.hessian[2]);
    cp.kind = cls.kind;
    cp.index = cls.index;

    // Interpolate u and the recovered gradient at the polished position.
    int host = -1;
    std::array<double, 3> lam{};
    for (const int v : patch) {
      for (const int tt : inc[v])
        if (barycentric(mesh, tt, pos, lam)) {
          host = tt;
          break;
        }
      if (host >= 0) break;
    }
    if (host < 0) {
      for (int tt = 0; tt < mesh.triangle_count() && host < 0; ++tt)
        if (barycentric(mesh, tt, pos, lam)) host = tt;
    }
    if (host < 0) continue;
    const auto& htri = mesh.triangles[host];
    double val = 0.0;
    Vec2 gi{0.0, 0.0};
    for (int k = 0; k < 3; ++k) {
      val += lam[k] * u[htri[k]];
      gi += g[htri[k]] * lam[k];
    }
    cp.value = val;
    cp.grad_residual = gi.norm();
    raw.push_back(cp);
  }

  // Dedupe: best residual first, reject anything within 2h of an accepted point.
  std::sort(raw.begin(), raw.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.grad_residual != b.grad_residual) return a.grad_residual < b.grad_residual;
    if (a.position.x != b.position.x) return a.position.x < b.position.x;
    return a.position.y < b.position.y;
  });
  std::vector<CriticalPoint> kept;
  for (const CriticalPoint& cp : raw) {
    bool close = false;
    for (const CriticalPoint& k : kept)
      if ((cp.position - k.position).norm() < 2.0 * mesh.h) {
        close = true;
        break;
      }
    if (!close) kept.push_back(cp);
  }
  std::sort(kept.begin(), kept.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.position.x != b.position.x) return a.position.x < b.position.x;
    return a.position.y < b.position.y;
  });
  return kept;
}

int boundary_winding(const Mesh& mesh, const Field& u, double* residue) {
  require_field_on(mesh, u);
  const std::vector<Vec2> g = recover_gradient(mesh, u);

  std::vector<double> tparam(mesh.node_count(),
                             std::numeric_limits<double>::quiet_NaN());
  for (const BoundaryEdge& e : mesh.boundary_edges) tparam[e.i] = e.t_i;

  // Interior nodes adjacent to the boundary, with the boundary parameters of
  // their boundary neighbors.
  std::vector<std::vector<int>> badj(mesh.node_count());
  for (const auto& tri : mesh.triangles)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (a != b && !mesh.on_boundary[tri[a]] && mesh.on_boundary[tri[b]])
          badj[tri[a]].push_back(tri[b]);

  struct InnerNode {
    double theta;
    int node;
  };
  std::vector<InnerNode> layer;
  for (int i = 0; i < mesh.node_count(); ++i) {
    if (badj[i].empty()) continue;
    auto& list = badj[i];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    double cs = 0.0, sn = 0.0;
    for (const int b : list) {
      cs += std::cos(tparam[b]);
      sn += std::sin(tparam[b]);
    }
    layer.push_back({std::atan2(sn, cs), i});
  }
  if (layer.size() < 3)
    throw CensusError("inner boundary layer too small for a winding number");
  std::sort(layer.begin(), layer.end(), [](const InnerNode& a, const InnerNode& b) {
    if (a.theta != b.theta) return a.theta < b.theta;
    return a.node < b.node;
  });

  // Per-triangle gradients carry cancellation noise of order eps*|u|/h, so a
  // flat field would otherwise yield a confident winding of pure round-off.
  const double grad_floor = 1e-10 * u.sup_norm() / mesh.h;

  double total = 0.0;
  const int n = static_cast<int>(layer.size());
  for (int k = 0; k < n; ++k) {
    const Vec2 ga = g[layer[k].node];
    const Vec2 gb = g[layer[(k + 1) % n].node];
    if (!(ga.norm() > grad_floor) || !(gb.norm() > grad_floor))
      throw CensusError("recovered gradient vanishes on the inner boundary layer");
    const double da = wrap_angle(std::atan2(gb.y, gb.x) - std::atan2(ga.y, ga.x));
    total += da;
  }
  const double w = total / (2.0 * std::numbers::pi);
  const double nearest = std::round(w);
  const double res = w - nearest;
  if (residue) *residue = res;
  if (std::abs(res) > 0.2)
    throw CensusError("boundary winding is ill-conditioned; refine the mesh");
  return static_cast<int>(nearest);
}

bool hopf_sign_check(const Mesh& mesh, const Field& u, double beta) {
  require_field_on(mesh, u);
  if (!(u.min_value() > 0.0)) return false;
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < mesh.node_count(); ++i)
    if (mesh.on_boundary[i]) worst = std::max(worst, -beta * u[i]);
  return worst < 0.0;
}

CritCensus census(const Mesh& mesh, const Field& u, double beta) {
  CritCensus c;
  c.points = locate_critical_points(mesh, u);
  for (const CriticalPoint& p : c.points) {
    c.index_sum += p.index;
    if (p.kind == CriticalPoint::Kind::Degenerate) c.any_degenerate = true;
  }
  c.boundary_winding = boundary_winding(mesh, u, &c.winding_residue);
  c.hopf_ok = hopf_sign_check(mesh, u, beta);
  return c;
}

CritCensus census_with_refinement(const BoundaryCurve& curve, double h, double beta,
                                  const std::function<Field(const Mesh&)>& solve,
                                  int max_passes) {
  Mesh mesh = triangulate(curve, h);
  Field u = solve(mesh);
  CritCensus prev = census(mesh, u, beta);
  for (int pass = 0; pass < max_passes; ++pass) {
    if (prev.points.empty()) return prev;  // nothing to refine near
    std::vector<Vec2> centers;
    centers.reserve(prev.points.size());
    for (const CriticalPoint& p : prev.points) centers.push_back(p.position);
    Mesh fine = refine_near(mesh, centers, 4.0 * mesh.h, curve);
    Field uf = solve(fine);
    CritCensus cur = census(fine, uf, beta);
    if (cur.signature() == prev.signature() && cur.index_sum == prev.index_sum &&
        cur.boundary_winding == prev.boundary_winding)
      return cur;
    prev = std::move(cur);
    mesh = std::move(fine);
  }
  throw CensusError("critical-point census did not stabilize under refinement");
}

}  // namespace robinlab
