#include "robinlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace robinlab {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kRowStep = 0.8660254037844386;  // sqrt(3)/2, hex lattice row spacing

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Deterministic hash of a lattice index pair to [0,1). Seeding the jitter from
// the indices (not from insertion order) keeps meshes reproducible.
double hash_unit(int64_t ix, int64_t iy, uint64_t salt) {
  const uint64_t h = splitmix64(static_cast<uint64_t>(ix) ^
                                splitmix64(static_cast<uint64_t>(iy) ^ splitmix64(salt)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Cumulative-arclength table for inverting s -> t on the boundary curve.
struct ArcTable {
  std::vector<double> ts;
  std::vector<double> ss;
  double total = 0.0;

  double t_of_s(double s) const {
    s = std::clamp(s, 0.0, total);
    const auto it = std::upper_bound(ss.begin(), ss.end(), s);
    size_t k = static_cast<size_t>(it - ss.begin());
    if (k == 0) k = 1;
    if (k >= ss.size()) k = ss.size() - 1;
    const double seg = ss[k] - ss[k - 1];
    const double f = seg > 0.0 ? (s - ss[k - 1]) / seg : 0.0;
    return ts[k - 1] + f * (ts[k] - ts[k - 1]);
  }
};

ArcTable build_arc_table(const BoundaryCurve& curve, int m = 1 << 14) {
  ArcTable tab;
  tab.ts.resize(m + 1);
  tab.ss.resize(m + 1);
  std::vector<double> speed(m + 1);
  for (int i = 0; i <= m; ++i) {
    tab.ts[i] = kTwoPi * i / m;
    speed[i] = curve.derivative(tab.ts[i]).norm();
  }
  tab.ss[0] = 0.0;
  const double dt = kTwoPi / m;
  for (int i = 0; i < m; ++i)
    tab.ss[i + 1] = tab.ss[i] + 0.5 * (speed[i] + speed[i + 1]) * dt;
  tab.total = tab.ss[m];
  return tab;
}

// Boundary nodes at the locally requested arclength spacing. A first walk
// measures how far the requested steps overshoot the perimeter; a second walk
// shrinks every step by the common factor so the loop closes without a short
// final edge and without any spacing exceeding its local target.
std::vector<double> boundary_params(const BoundaryCurve& curve, const ArcTable& tab,
                                    const std::function<double(Vec2)>& spacing_at) {
  double s = 0.0;
  int n = 0;
  while (s < tab.total) {
    s += spacing_at(curve.point(tab.t_of_s(s)));
    ++n;
    if (n > 4'000'000) throw MeshError("boundary sampling did not terminate");
  }
  const double factor = tab.total / s;
  std::vector<double> params;
  params.reserve(n);
  s = 0.0;
  for (int k = 0; k < n; ++k) {
    params.push_back(tab.t_of_s(s));
    s += factor * spacing_at(curve.point(params.back()));
  }
  return params;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  const double len2 = d.dot(d);
  double f = len2 > 0.0 ? (p - a).dot(d) / len2 : 0.0;
  f = std::clamp(f, 0.0, 1.0);
  return (p - (a + d * f)).norm();
}

// Hash-grid over boundary polyline segments for fast near-boundary queries.
class SegmentGrid {
 public:
  SegmentGrid(const std::vector<Vec2>& loop, double cell) : loop_(loop), cell_(cell) {
    const int n = static_cast<int>(loop.size());
    for (int i = 0; i < n; ++i) {
      const Vec2 a = loop[i];
      const Vec2 b = loop[(i + 1) % n];
      const int x0 = cell_index(std::min(a.x, b.x));
      const int x1 = cell_index(std::max(a.x, b.x));
      const int y0 = cell_index(std::min(a.y, b.y));
      const int y1 = cell_index(std::max(a.y, b.y));
      for (int cx = x0; cx <= x1; ++cx)
        for (int cy = y0; cy <= y1; ++cy) bins_[key(cx, cy)].push_back(i);
    }
  }

  // Minimum distance from p to the polyline, searching only cells within
  // `radius`; returns +inf when every nearby cell is empty (distance > radius).
  double distance_within(Vec2 p, double radius) const {
    const int ring = static_cast<int>(std::ceil(radius / cell_)) + 1;
    const int cx = cell_index(p.x);
    const int cy = cell_index(p.y);
    double best = std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(loop_.size());
    for (int dx = -ring; dx <= ring; ++dx)
      for (int dy = -ring; dy <= ring; ++dy) {
        const auto it = bins_.find(key(cx + dx, cy + dy));
        if (it == bins_.end()) continue;
        for (const int i : it->second)
          best = std::min(best,
                          point_segment_distance(p, loop_[i], loop_[(i + 1) % n]));
      }
    return best;
  }

 private:
  int cell_index(double v) const { return static_cast<int>(std::floor(v / cell_)); }
  static uint64_t key(int cx, int cy) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(cx)) << 32) |
           static_cast<uint32_t>(cy);
  }

  std::vector<Vec2> loop_;
  double cell_;
  std::unordered_map<uint64_t, std::vector<int>> bins_;
};

bool inside_polygon(const std::vector<Vec2>& loop, Vec2 p) {
  bool in = false;
  const int n = static_cast<int>(loop.size());
  for (int i = 0; i < n; ++i) {
    const Vec2 a = loop[i];
    const Vec2 b = loop[(i + 1) % n];
    if ((a.y <= p.y) != (b.y <= p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) in = !in;
    }
  }
  return in;
}

// Sorted x-crossings of the polyline with the horizontal line y=const; a point
// on that line is inside iff an odd number of crossings lies to its right.
std::vector<double> scanline_crossings(const std::vector<Vec2>& loop, double y) {
  std::vector<double> xs;
  const int n = static_cast<int>(loop.size());
  for (int i = 0; i < n; ++i) {
    const Vec2 a = loop[i];
    const Vec2 b = loop[(i + 1) % n];
    if ((a.y <= y) != (b.y <= y))
      xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

bool inside_from_crossings(const std::vector<double>& xs, double x) {
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  return ((xs.end() - it) % 2) == 1;
}

// Incremental Bowyer-Watson Delaunay triangulation with walk-based point
// location. Deterministic given the insertion order.
class Triangulator {
 public:
  explicit Triangulator(std::vector<Vec2> points) : pts_(std::move(points)) {
    n_real_ = static_cast<int>(pts_.size());
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const Vec2& p : pts_) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
    const double cx = 0.5 * (xmin + xmax);
    const double cy = 0.5 * (ymin + ymax);
    const double r = 16.0 * std::max({xmax - xmin, ymax - ymin, 1e-6}) + 1.0;
    pts_.push_back({cx - 3.0 * r, cy - 2.0 * r});
    pts_.push_back({cx + 3.0 * r, cy - 2.0 * r});
    pts_.push_back({cx, cy + 3.0 * r});
    add_tri(n_real_, n_real_ + 1, n_real_ + 2, -1, -1, -1);
    last_tri_ = 0;
  }

  void run() {
    for (int i = 0; i < n_real_; ++i) insert(i);
  }

  // Kept triangles: no super vertices and centroid inside the boundary loop.
  std::vector<std::array<int, 3>> extract(const std::vector<Vec2>& loop) const {
    std::vector<std::array<int, 3>> out;
    for (size_t t = 0; t < tris_.size(); ++t) {
      if (!alive_[t]) continue;
      const Tri& tr = tris_[t];
      if (tr.v[0] >= n_real_ || tr.v[1] >= n_real_ || tr.v[2] >= n_real_) continue;
      const Vec2 c = (pts_[tr.v[0]] + pts_[tr.v[1]] + pts_[tr.v[2]]) * (1.0 / 3.0);
      if (!inside_polygon(loop, c)) continue;
      out.push_back({tr.v[0], tr.v[1], tr.v[2]});
    }
    return out;
  }

 private:
  struct Tri {
    int v[3];
    int adj[3];  // adj[i] shares the edge opposite v[i]
  };

  static double orient(Vec2 a, Vec2 b, Vec2 c) { return (b - a).cross(c - a); }

  static bool in_circle(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double ad2 = adx * adx + ady * ady;
    const double bd2 = bdx * bdx + bdy * bdy;
    const double cd2 = cdx * cdx + cdy * cdy;
    const double det = ad2 * (bdx * cdy - bdy * cdx) + bd2 * (cdx * ady - cdy * adx) +
                       cd2 * (adx * bdy - ady * bdx);
    const double scale = ad2 * (std::abs(bdx * cdy) + std::abs(bdy * cdx)) +
                         bd2 * (std::abs(cdx * ady) + std::abs(cdy * adx)) +
                         cd2 * (std::abs(adx * bdy) + std::abs(ady * bdx));
    // Near-cocircular configurations count as outside; the cavity stays
    // star-shaped and the diagonal choice is deterministic.
    return det > 1e-12 * scale;
  }

  int add_tri(int a, int b, int c, int na, int nb, int nc) {
    int idx;
    if (!free_.empty()) {
      idx = free_.back();
      free_.pop_back();
      tris_[idx] = {{a, b, c}, {na, nb, nc}};
      alive_[idx] = 1;
      stamp_[idx] = 0;
    } else {
      idx = static_cast<int>(tris_.size());
      tris_.push_back({{a, b, c}, {na, nb, nc}});
      alive_.push_back(1);
      stamp_.push_back(0);
    }
    return idx;
  }

  int locate(Vec2 p) const {
    int t = last_tri_;
    int prev = -1;
    const int guard = static_cast<int>(tris_.size()) * 4 + 64;
    for (int step = 0; step < guard; ++step) {
      int next = -1;
      for (int e = 0; e < 3; ++e) {
        const int n = tris_[t].adj[e];
        if (n == prev) continue;
        const Vec2 a = pts_[tris_[t].v[(e + 1) % 3]];
        const Vec2 b = pts_[tris_[t].v[(e + 2) % 3]];
        if (orient(a, b, p) < 0.0) {
          next = n;
          break;
        }
      }
      if (next < 0) return t;
      prev = t;
      t = next;
    }
    // Deterministic fallback: linear scan for a containing triangle.
    for (size_t t2 = 0; t2 < tris_.size(); ++t2) {
      if (!alive_[t2]) continue;
      bool ok = true;
      for (int e = 0; e < 3 && ok; ++e) {
        const Vec2 a = pts_[tris_[t2].v[(e + 1) % 3]];
        const Vec2 b = pts_[tris_[t2].v[(e + 2) % 3]];
        if (orient(a, b, p) < 0.0) ok = false;
      }
      if (ok) return static_cast<int>(t2);
    }
    throw MeshError("triangulation point location failed");
  }

  void insert(int pi) {
    const Vec2 p = pts_[pi];
    const int t0 = locate(p);
    ++cur_stamp_;
    std::vector<int> cavity;
    std::vector<int> stack{t0};
    stamp_[t0] = cur_stamp_;
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      cavity.push_back(t);
      for (int e = 0; e < 3; ++e) {
        const int n = tris_[t].adj[e];
        if (n < 0 || stamp_[n] == cur_stamp_) continue;
        if (in_circle(pts_[tris_[n].v[0]], pts_[tris_[n].v[1]], pts_[tris_[n].v[2]], p))
          {
            stamp_[n] = cur_stamp_;
            stack.push_back(n);
          }
      }
    }
    struct RingEdge {
      int a, b, outer, outer_slot;
    };
    std::vector<RingEdge> ring;
    for (const int t : cavity)
      for (int e = 0; e < 3; ++e) {
        const int n = tris_[t].adj[e];
        if (n >= 0 && stamp_[n] == cur_stamp_) continue;
        int slot = -1;
        if (n >= 0)
          for (int s = 0; s < 3; ++s)
            if (tris_[n].adj[s] == t) slot = s;
        ring.push_back({tris_[t].v[(e + 1) % 3], tris_[t].v[(e + 2) % 3], n, slot});
      }
    for (const int t : cavity) {
      alive_[t] = 0;
      free_.push_back(t);
    }
    std::unordered_map<int, int> by_first;
    by_first.reserve(ring.size() * 2);
    std::vector<int> created;
    created.reserve(ring.size());
    for (const RingEdge& e : ring) {
      const int nt = add_tri(e.a, e.b, pi, -1, -1, e.outer);
      if (e.outer >= 0) tris_[e.outer].adj[e.outer_slot] = nt;
      by_first[e.a] = nt;
      created.push_back(nt);
    }
    for (const int nt : created) {
      const int b = tris_[nt].v[1];
      const auto it = by_first.find(b);
      if (it == by_first.end()) throw MeshError("triangulation cavity ring is broken");
      tris_[nt].adj[0] = it->second;   // edge (b, p)
      tris_[it->second].adj[1] = nt;   // its edge (p, b)
    }
    last_tri_ = created.back();
  }

  std::vector<Vec2> pts_;
  std::vector<Tri> tris_;
  std::vector<char> alive_;
  std::vector<uint32_t> stamp_;
  std::vector<int> free_;
  uint32_t cur_stamp_ = 0;
  int last_tri_ = -1;
  int n_real_ = 0;
};

struct NodeSet {
  std::vector<Vec2> points;       // boundary nodes first, lattice nodes after
  std::vector<double> tparams;    // curve parameter per boundary node
};

// Boundary nodes plus hexagonal interior seeding. `fine_pitch` is the lattice
// pitch actually generated; when `graded` is set, lattice points outside the
// refinement disks are kept only on the coarse (2x pitch) hexagonal
// sublattice, producing an h/2-inside, h-outside grading.
NodeSet seed_nodes(const BoundaryCurve& curve, const ArcTable& tab, double h_coarse,
                   bool graded, const std::vector<Vec2>& centers, double radius) {
  const auto in_region = [&](Vec2 p) {
    for (const Vec2& c : centers)
      if ((p - c).norm() <= radius) return true;
    return false;
  };
  const auto local_h = [&](Vec2 p) {
    return (graded && in_region(p)) ? 0.5 * h_coarse : h_coarse;
  };

  NodeSet out;
  out.tparams = boundary_params(curve, tab, local_h);
  for (const double t : out.tparams) out.points.push_back(curve.point(t));
  const std::vector<Vec2> loop = out.points;  // boundary polyline

  const SegmentGrid grid(loop, h_coarse);
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const Vec2& p : loop) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }

  const double pitch = graded ? 0.5 * h_coarse : h_coarse;
  const double dy = pitch * kRowStep;
  const int64_t iy0 = static_cast<int64_t>(std::floor(ymin / dy)) - 1;
  const int64_t iy1 = static_cast<int64_t>(std::ceil(ymax / dy)) + 1;
  for (int64_t iy = iy0; iy <= iy1; ++iy) {
    const double y = static_cast<double>(iy) * dy;
    if (y < ymin || y > ymax) continue;
    const std::vector<double> xs = scanline_crossings(loop, y);
    if (xs.empty()) continue;
    const double off = ((iy % 2 + 2) % 2) ? 0.5 : 0.0;
    const int64_t ix0 = static_cast<int64_t>(std::floor(xmin / pitch - off)) - 1;
    const int64_t ix1 = static_cast<int64_t>(std::ceil(xmax / pitch - off)) + 1;
    for (int64_t ix = ix0; ix <= ix1; ++ix) {
      const Vec2 p{(static_cast<double>(ix) + off) * pitch, y};
      if (p.x < xmin || p.x > xmax) continue;
      double target = pitch;
      if (graded) {
        const bool fine = in_region(p);
        if (!fine) {
          // Coarse sublattice of the fine hexagonal lattice: even rows, with
          // the column parity alternating so the sublattice stays hexagonal.
          if ((iy % 2 + 2) % 2 != 0) continue;
          const int64_t row = iy / 2;
          const int64_t want = ((row % 2) + 2) % 2;
          if (((ix - want) % 2 + 2) % 2 != 0) continue;
          target = h_coarse;
        }
      }
      const double margin = 0.65 * target;
      if (grid.distance_within(p, margin) < margin) continue;
      if (!inside_from_crossings(xs, p.x)) continue;
      const double jx = (hash_unit(ix, iy, 17) * 2.0 - 1.0) * 0.02 * pitch;
      const double jy = (hash_unit(ix, iy, 41) * 2.0 - 1.0) * 0.02 * pitch;
      out.points.push_back({p.x + jx, p.y + jy});
    }
  }
  return out;
}

double tri_area(const std::vector<Vec2>& nodes, const std::array<int, 3>& t) {
  return 0.5 * (nodes[t[1]] - nodes[t[0]]).cross(nodes[t[2]] - nodes[t[0]]);
}

// Three Laplacian smoothing passes (sequential, deterministic order) on
// interior nodes with an inversion safeguard.
void smooth_interior(std::vector<Vec2>& nodes, const std::vector<std::array<int, 3>>& tris,
                     int n_boundary) {
  const int n = static_cast<int>(nodes.size());
  std::vector<std::vector<int>> nbr(n);
  std::vector<std::vector<int>> inc(n);
  for (size_t t = 0; t < tris.size(); ++t)
    for (int e = 0; e < 3; ++e) {
      const int a = tris[t][e];
      const int b = tris[t][(e + 1) % 3];
      nbr[a].push_back(b);
      nbr[b].push_back(a);
      inc[a].push_back(static_cast<int>(t));
    }
  for (int i = 0; i < n; ++i) {
    std::sort(nbr[i].begin(), nbr[i].end());
    nbr[i].erase(std::unique(nbr[i].begin(), nbr[i].end()), nbr[i].end());
  }
  for (int pass = 0; pass < 3; ++pass)
    for (int i = n_boundary; i < n; ++i) {
      if (nbr[i].empty()) continue;
      Vec2 avg{0.0, 0.0};
      for (const int j : nbr[i]) avg += nodes[j];
      avg = avg * (1.0 / static_cast<double>(nbr[i].size()));
      const Vec2 old = nodes[i];
      nodes[i] = avg;
      for (const int t : inc[i])
        if (tri_area(nodes, tris[t]) <= 1e-14) {
          nodes[i] = old;  // the move would flatten or flip a triangle
          break;
        }
    }
}

Mesh assemble_mesh(const BoundaryCurve& curve, const NodeSet& ns,
                   std::vector<std::array<int, 3>> tris, double h_stored,
                   const char* context) {
  const int nb = static_cast<int>(ns.tparams.size());
  Mesh mesh;
  mesh.nodes = ns.points;
  mesh.h = h_stored;
  smooth_interior(mesh.nodes, tris, nb);
  mesh.triangles = std::move(tris);

  // Orphaned nodes mean seeding placed a point whose entire star was culled.
  std::vector<char> used(mesh.nodes.size(), 0);
  for (const auto& t : mesh.triangles)
    for (const int v : t) used[v] = 1;
  for (size_t i = 0; i < used.size(); ++i)
    if (!used[i])
      throw MeshError(std::string(context) +
                      ": seeding produced an unused node; use a smaller h");

  // Boundary edges are the edges incident to exactly one triangle; they must
  // be precisely the consecutive boundary-node pairs.
  std::unordered_map<uint64_t, int> edge_count;
  const auto ekey = [](int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<uint64_t>(a) << 32) | static_cast<uint32_t>(b);
  };
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) ++edge_count[ekey(t[e], t[(e + 1) % 3])];
  int boundary_found = 0;
  for (const auto& [k, c] : edge_count) {
    if (c == 1) ++boundary_found;
    if (c > 2)
      throw MeshError(std::string(context) + ": non-manifold edge; use a smaller h");
  }
  if (boundary_found != nb)
    throw MeshError(std::string(context) +
                    ": boundary loop was not recovered; use a smaller h");
  for (int k = 0; k < nb; ++k) {
    const int i = k;
    const int j = (k + 1) % nb;
    const auto it = edge_count.find(ekey(i, j));
    if (it == edge_count.end() || it->second != 1)
      throw MeshError(std::string(context) +
                      ": boundary loop was not recovered; use a smaller h");
    BoundaryEdge be;
    be.i = i;
    be.j = j;
    be.t_i = ns.tparams[i];
    be.t_j = (j == 0) ? ns.tparams[0] + kTwoPi : ns.tparams[j];
    const Vec2 d = mesh.nodes[j] - mesh.nodes[i];
    be.length = d.norm();
    be.normal = (d * (1.0 / be.length)).rotated_cw();
    mesh.boundary_edges.push_back(be);
  }
  mesh.on_boundary.assign(mesh.nodes.size(), 0);
  for (int k = 0; k < nb; ++k) mesh.on_boundary[k] = 1;
  (void)curve;
  mesh.validate();
  return mesh;
}

Mesh build_mesh(const BoundaryCurve& curve, double h_coarse, bool graded,
                const std::vector<Vec2>& centers, double radius, double h_stored,
                const char* context) {
  const ArcTable tab = build_arc_table(curve);
  if (!(h_coarse > 0.0) || !(h_coarse < tab.total / 16.0))
    throw MeshError(std::string(context) +
                    ": h must satisfy 0 < h < perimeter/16");
  const NodeSet ns = seed_nodes(curve, tab, h_coarse, graded, centers, radius);
  Triangulator tri(ns.points);
  tri.run();
  std::vector<Vec2> loop(ns.points.begin(),
                         ns.points.begin() + static_cast<long>(ns.tparams.size()));
  return assemble_mesh(curve, ns, tri.extract(loop), h_stored, context);
}

}  // namespace

double Mesh::triangle_area(int t) const { return tri_area(nodes, triangles[t]); }

double Mesh::total_area() const {
  double a = 0.0;
  for (int t = 0; t < triangle_count(); ++t) a += triangle_area(t);
  return a;
}

double Mesh::boundary_length() const {
  double l = 0.0;
  for (const BoundaryEdge& e : boundary_edges) l += e.length;
  return l;
}

double Mesh::min_angle_deg() const {
  double worst = 180.0;
  for (const auto& t : triangles) {
    const Vec2 p[3] = {nodes[t[0]], nodes[t[1]], nodes[t[2]]};
    for (int v = 0; v < 3; ++v) {
      const Vec2 u = p[(v + 1) % 3] - p[v];
      const Vec2 w = p[(v + 2) % 3] - p[v];
      const double c = std::clamp(u.dot(w) / (u.norm() * w.norm()), -1.0, 1.0);
      worst = std::min(worst, std::acos(c) * 180.0 / std::numbers::pi);
    }
  }
  return worst;
}

void Mesh::validate() const {
  const int n = node_count();
  if (n < 3 || triangles.empty()) throw MeshError("mesh is empty");
  for (const Vec2& p : nodes)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw MeshError("mesh has non-finite node coordinates");
  for (int t = 0; t < triangle_count(); ++t) {
    for (const int v : triangles[t])
      if (v < 0 || v >= n) throw MeshError("triangle references a missing node");
    if (!(triangle_area(t) > 0.0))
      throw MeshError("triangle with non-positive area (orientation broken)");
  }

  std::unordered_map<uint64_t, int> edge_count;
  const auto ekey = [](int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<uint64_t>(a) << 32) | static_cast<uint32_t>(b);
  };
  for (const auto& t : triangles)
    for (int e = 0; e < 3; ++e) ++edge_count[ekey(t[e], t[(e + 1) % 3])];
  for (const auto& [k, c] : edge_count)
    if (c > 2) throw MeshError("edge shared by more than two triangles");

  if (boundary_edges.empty()) throw MeshError("mesh has no boundary edges");
  std::vector<int> next(n, -1);
  int loop_edges = 0;
  for (const BoundaryEdge& e : boundary_edges) {
    const auto it = edge_count.find(ekey(e.i, e.j));
    if (it == edge_count.end() || it->second != 1)
      throw MeshError("listed boundary edge is not a one-triangle edge");
    if (next[e.i] != -1) throw MeshError("boundary loop branches at a node");
    next[e.i] = e.j;
    ++loop_edges;
  }
  int singles = 0;
  for (const auto& [k, c] : edge_count)
    if (c == 1) ++singles;
  if (singles != loop_edges)
    throw MeshError("mesh has boundary edges missing from the boundary list");
  int at = boundary_edges.front().i;
  int visited = 0;
  do {
    if (next[at] == -1) throw MeshError("boundary loop is not closed");
    at = next[at];
    ++visited;
    if (visited > loop_edges) throw MeshError("boundary loop does not close");
  } while (at != boundary_edges.front().i);
  if (visited != loop_edges) throw MeshError("boundary has more than one loop");

  if (static_cast<int>(on_boundary.size()) != n)
    throw MeshError("boundary flag array has the wrong length");
  std::vector<char> expect(n, 0);
  for (const BoundaryEdge& e : boundary_edges) expect[e.i] = expect[e.j] = 1;
  for (int i = 0; i < n; ++i)
    if (expect[i] != on_boundary[i]) throw MeshError("boundary flags are stale");

  // Connectivity: every triangle reachable over shared edges.
  std::unordered_map<uint64_t, std::array<int, 2>> edge_tris;
  for (int t = 0; t < triangle_count(); ++t)
    for (int e = 0; e < 3; ++e) {
      auto& slot = edge_tris[ekey(triangles[t][e], triangles[t][(e + 1) % 3])];
      if (slot[0] == 0 && slot[1] == 0) slot = {-1, -1};
      (slot[0] == -1 ? slot[0] : slot[1]) = t;
    }
  std::vector<char> seen(triangle_count(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 0;
  while (!stack.empty()) {
    const int t = stack.back();
    stack.pop_back();
    ++reached;
    for (int e = 0; e < 3; ++e) {
      const auto& slot = edge_tris[ekey(triangles[t][e], triangles[t][(e + 1) % 3])];
      for (const int o : slot)
        if (o >= 0 && !seen[o]) {
          seen[o] = 1;
          stack.push_back(o);
        }
    }
  }
  if (reached != triangle_count())
    throw MeshError("mesh is disconnected");

  const double angle = min_angle_deg();
  if (angle < 15.0) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "mesh quality failure: min angle %.2f deg < 15",
                  angle);
    throw MeshError(std::string(buf) + "; use a smaller h");
  }
}

void Mesh::write_text(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  char buf[200];
  std::snprintf(buf, sizeof(buf), "# h %.17g\n", h);
  out << buf;
  out << "NODES " << node_count() << "\n";
  for (int i = 0; i < node_count(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d %.17g %.17g\n", i, nodes[i].x, nodes[i].y);
    out << buf;
  }
  out << "TRIANGLES " << triangle_count() << "\n";
  for (const auto& t : triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "BEDGES " << boundary_edges.size() << "\n";
  for (const BoundaryEdge& e : boundary_edges) {
    std::snprintf(buf, sizeof(buf), "%d %d %.17g %.17g\n", e.i, e.j, e.t_i, e.t_j);
    out << buf;
  }
}

Mesh Mesh::read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Mesh mesh;
  std::string line;
  std::string section;
  int remaining = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string tag;
      double v;
      if (hs >> tag >> v && tag == "h") mesh.h = v;
      continue;
    }
    std::istringstream row(line);
    if (remaining == 0) {
      if (!(row >> section >> remaining) ||
          (section != "NODES" && section != "TRIANGLES" && section != "BEDGES"))
        throw IoError("malformed mesh section header in " + path + ": " + line);
      continue;
    }
    if (section == "NODES") {
      int idx;
      double x, y;
      if (!(row >> idx >> x >> y) || idx != static_cast<int>(mesh.nodes.size()))
        throw IoError("malformed NODES row in " + path + ": " + line);
      mesh.nodes.push_back({x, y});
    } else if (section == "TRIANGLES") {
      std::array<int, 3> t;
      if (!(row >> t[0] >> t[1] >> t[2]))
        throw IoError("malformed TRIANGLES row in " + path + ": " + line);
      mesh.triangles.push_back(t);
    } else {
      BoundaryEdge e;
      if (!(row >> e.i >> e.j >> e.t_i >> e.t_j))
        throw IoError("malformed BEDGES row in " + path + ": " + line);
      mesh.boundary_edges.push_back(e);
    }
    --remaining;
  }
  if (remaining != 0) throw IoError("truncated mesh file " + path);
  for (BoundaryEdge& e : mesh.boundary_edges) {
    if (e.i < 0 || e.j < 0 || e.i >= mesh.node_count() || e.j >= mesh.node_count())
      throw IoError("boundary edge references a missing node in " + path);
    const Vec2 d = mesh.nodes[e.j] - mesh.nodes[e.i];
    e.length = d.norm();
    e.normal = (d * (1.0 / e.length)).rotated_cw();
  }
  mesh.on_boundary.assign(mesh.nodes.size(), 0);
  for (const BoundaryEdge& e : mesh.boundary_edges)
    mesh.on_boundary[e.i] = mesh.on_boundary[e.j] = 1;
  if (mesh.h == 0.0 && !mesh.boundary_edges.empty()) {
    double acc = 0.0;
    for (const BoundaryEdge& e : mesh.boundary_edges) acc += e.length;
    mesh.h = acc / static_cast<double>(mesh.boundary_edges.size());
  }
  mesh.validate();
  return mesh;
}

Mesh triangulate(const BoundaryCurve& curve, double h) {
  return build_mesh(curve, h, false, {}, 0.0, h, "triangulate");
}

Mesh refine_near(const Mesh& mesh, const std::vector<Vec2>& centers, double radius,
                 const BoundaryCurve& curve) {
  const double h = mesh.h;
  if (centers.empty()) return build_mesh(curve, h, false, {}, 0.0, h, "refine_near");
  if (!(radius > 0.0)) throw MeshError("refine_near: radius must be positive");
  std::vector<Vec2> loop;
  const int m = 1024;
  loop.reserve(m);
  for (int i = 0; i < m; ++i) loop.push_back(curve.point(kTwoPi * i / m));
  for (const Vec2& c : centers)
    if (!inside_polygon(loop, c))
      throw MeshError("refine_near: a center lies outside the domain");
  return build_mesh(curve, h, true, centers, radius, 0.5 * h, "refine_near");
}

std::vector<std::vector<int>> node_triangle_adjacency(const Mesh& mesh) {
  std::vector<std::vector<int>> inc(mesh.node_count());
  for (int t = 0; t < mesh.triangle_count(); ++t)
    for (const int v : mesh.triangles[t]) inc[v].push_back(t);
  return inc;
}

bool point_inside(const Mesh& mesh, Vec2 p) {
  std::vector<Vec2> loop;
  loop.reserve(mesh.boundary_edges.size());
  for (const BoundaryEdge& e : mesh.boundary_edges) loop.push_back(mesh.nodes[e.i]);
  return inside_polygon(loop, p);
}

}  // namespace robinlab
