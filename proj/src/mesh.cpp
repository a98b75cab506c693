#include "greenfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace greenfem {

double tri_area(const Mesh& m, int t) {
  const auto& v = m.tris[t];
  return 0.5 * cross(m.nodes[v[1]] - m.nodes[v[0]], m.nodes[v[2]] - m.nodes[v[0]]);
}

Vec2 tri_centroid(const Mesh& m, int t) {
  const auto& v = m.tris[t];
  return (1.0 / 3.0) * (m.nodes[v[0]] + m.nodes[v[1]] + m.nodes[v[2]]);
}

double max_edge_length(const Mesh& m) {
  double best = 0.0;
  for (const auto& v : m.tris)
    for (int e = 0; e < 3; ++e)
      best = std::max(best, dist(m.nodes[v[e]], m.nodes[v[(e + 1) % 3]]));
  return best;
}

double min_angle_degrees(const Mesh& m) {
  double best = 180.0;
  for (const auto& v : m.tris) {
    for (int k = 0; k < 3; ++k) {
      const Vec2 a = m.nodes[v[k]], b = m.nodes[v[(k + 1) % 3]],
                 c = m.nodes[v[(k + 2) % 3]];
      const Vec2 u = b - a, w = c - a;
      const double ang =
          std::atan2(std::abs(cross(u, w)), dot(u, w)) * 180.0 / M_PI;
      best = std::min(best, ang);
    }
  }
  return best;
}

double total_area(const Mesh& m) {
  double s = 0.0;
  for (int t = 0; t < m.num_tris(); ++t) s += tri_area(m, t);
  return s;
}

std::vector<char> nodes_on_tag(const Mesh& m, BoundaryTag tag) {
  std::vector<char> flag(m.num_nodes(), 0);
  for (const auto& be : m.bedges)
    if (be.tag == tag) {
      flag[be.a] = 1;
      flag[be.b] = 1;
    }
  return flag;
}

// ---------------------------------------------------------------------------
// Constrained Delaunay construction
// ---------------------------------------------------------------------------

namespace {

// splitmix64, used for the deterministic interior-point jitter.
uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

bool in_circle(Vec2 a, Vec2 b, Vec2 c, Vec2 p) {
  const long double adx = a.x - p.x, ady = a.y - p.y;
  const long double bdx = b.x - p.x, bdy = b.y - p.y;
  const long double cdx = c.x - p.x, cdy = c.y - p.y;
  const long double ad2 = adx * adx + ady * ady;
  const long double bd2 = bdx * bdx + bdy * bdy;
  const long double cd2 = cdx * cdx + cdy * cdy;
  const long double det = adx * (bdy * cd2 - bd2 * cdy) -
                          ady * (bdx * cd2 - bd2 * cdx) +
                          ad2 * (bdx * cdy - bdy * cdx);
  long double mmax = 0.0;
  for (long double v : {adx, ady, bdx, bdy, cdx, cdy})
    mmax = std::max(mmax, std::abs(v));
  const long double thr = 1e-15L * mmax * mmax * mmax * mmax;
  return det > thr;
}

struct DelTri {
  std::array<int, 3> v{};
  std::array<int, 3> nb{};  // neighbor across the edge opposite v[i]
  bool alive = true;
};

class Delaunay {
 public:
  std::vector<Vec2> pts;
  std::vector<DelTri> tris;

  void init_super(Vec2 lo, Vec2 hi) {
    const Vec2 c = 0.5 * (lo + hi);
    const double s = std::max({hi.x - lo.x, hi.y - lo.y, 1e-9}) * 64.0;
    super0_ = static_cast<int>(pts.size());
    pts.push_back({c.x - 2.0 * s, c.y - s});
    pts.push_back({c.x + 2.0 * s, c.y - s});
    pts.push_back({c.x, c.y + 2.0 * s});
    tris.push_back({{super0_, super0_ + 1, super0_ + 2}, {-1, -1, -1}, true});
    hint_ = 0;
  }

  int super_base() const { return super0_; }

  int locate(Vec2 p) const {
    int t = hint_;
    if (t < 0 || t >= static_cast<int>(tris.size()) || !tris[t].alive)
      t = first_alive();
    const int limit = 4 * static_cast<int>(tris.size()) + 64;
    for (int step = 0; step < limit; ++step) {
      bool moved = false;
      for (int e = 0; e < 3 && !moved; ++e) {
        const Vec2 a = pts[tris[t].v[(e + 1) % 3]];
        const Vec2 b = pts[tris[t].v[(e + 2) % 3]];
        const double tol =
            1e-14 * norm(b - a) * (norm(p - a) + norm(b - a) + 1e-300);
        if (cross(b - a, p - a) < -tol) {
          const int n = tris[t].nb[e];
          if (n < 0) return t;  // outside the hull; caller copes
          t = n;
          moved = true;
        }
      }
      if (!moved) return t;
    }
    return scan(p);
  }

  void insert(int ip) {
    const Vec2 p = pts[ip];
    const int t0 = locate(p);
    // Cavity: BFS over triangles whose circumcircle contains p.
    ++epoch_;
    std::vector<int> cavity;
    std::vector<int> stack{t0};
    mark(t0);
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      cavity.push_back(t);
      for (int e = 0; e < 3; ++e) {
        const int n = tris[t].nb[e];
        if (n < 0 || marked(n)) continue;
        const auto& w = tris[n].v;
        if (in_circle(pts[w[0]], pts[w[1]], pts[w[2]], p)) {
          mark(n);
          stack.push_back(n);
        }
      }
    }
    // Cavity boundary: directed edges owned by cavity triangles whose
    // neighbor lies outside.
    struct BEdge {
      int a, b, outside;
    };
    std::vector<BEdge> border;
    for (int t : cavity) {
      for (int e = 0; e < 3; ++e) {
        const int n = tris[t].nb[e];
        if (n >= 0 && marked(n)) continue;
        border.push_back({tris[t].v[(e + 1) % 3], tris[t].v[(e + 2) % 3], n});
      }
    }
    for (int t : cavity) tris[t].alive = false;
    // Fan from p; link neighbors via the half-edge map.
    std::map<std::pair<int, int>, std::pair<int, int>> half;  // (u,v) -> (tri,slot)
    int last = -1;
    for (const BEdge& be : border) {
      const int nt = static_cast<int>(tris.size());
      tris.push_back({{ip, be.a, be.b}, {be.outside, -1, -1}, true});
      if (be.outside >= 0) {
        DelTri& o = tris[be.outside];
        for (int e = 0; e < 3; ++e)
          if ((o.v[(e + 1) % 3] == be.b && o.v[(e + 2) % 3] == be.a))
            o.nb[e] = nt;
      }
      half[{be.a, ip}] = {nt, 2};  // edge (ip,a) is opposite slot 2? see below
      half[{ip, be.b}] = {nt, 1};
      last = nt;
    }
    // Slots: triangle (ip, a, b): edge opposite slot0 is (a,b) -> outside;
    // opposite slot1 is (b, ip); opposite slot2 is (ip, a).
    for (auto& [key, val] : half) {
      const auto rev = half.find({key.second, key.first});
      if (rev != half.end()) tris[val.first].nb[val.second] = rev->second.first;
    }
    hint_ = last >= 0 ? last : hint_;
  }

  bool edge_exists(int u, int v) const {
    for (const DelTri& t : tris) {
      if (!t.alive) continue;
      for (int e = 0; e < 3; ++e)
        if ((t.v[e] == u && t.v[(e + 1) % 3] == v) ||
            (t.v[e] == v && t.v[(e + 1) % 3] == u))
          return true;
    }
    return false;
  }

  // Flip the edge opposite slot e of triangle t (shared with its neighbor);
  // returns false when the surrounding quad is not strictly convex.
  bool flip(int t, int e) {
    const int t2 = tris[t].nb[e];
    if (t2 < 0) return false;
    int e2 = -1;
    for (int k = 0; k < 3; ++k)
      if (tris[t2].nb[k] == t) e2 = k;
    if (e2 < 0) return false;
    const int p = tris[t].v[e];
    const int a = tris[t].v[(e + 1) % 3];
    const int b = tris[t].v[(e + 2) % 3];
    const int q = tris[t2].v[e2];
    const Vec2 P = pts[p], A = pts[a], B = pts[b], Q = pts[q];
    // New diagonal p-q must split the quad strictly.
    if (cross(Q - P, A - P) <= 0.0 || cross(B - P, Q - P) <= 0.0) return false;
    const int X = tris[t].nb[(e + 1) % 3];   // across (b,p)
    const int Y = tris[t].nb[(e + 2) % 3];   // across (p,a)
    const int Z = tris[t2].nb[(e2 + 2) % 3]; // across (q, ...) bordering a
    const int W = tris[t2].nb[(e2 + 1) % 3];
    // t2 is (q, b, a) up to rotation with edge (b,a) opposite q.
    // After the flip: t -> (p, a, q), t2 -> (q, b, p).
    tris[t].v = {p, a, q};
    tris[t2].v = {q, b, p};
    tris[t].nb = {Z, t2, Y};
    tris[t2].nb = {X, t, W};
    auto relink = [&](int nb, int from, int to) {
      if (nb < 0) return;
      for (int k = 0; k < 3; ++k)
        if (tris[nb].nb[k] == from) tris[nb].nb[k] = to;
    };
    relink(Z, t2, t);
    relink(X, t, t2);
    return true;
  }

  // Force the segment (u,v) to appear as an edge by flipping the diagonals
  // that cross it.
  void recover_edge(int u, int v) {
    const Vec2 U = pts[u], V = pts[v];
    for (int guard = 0; guard < 20000; ++guard) {
      if (edge_exists(u, v)) return;
      bool flipped = false;
      for (int t = 0; t < static_cast<int>(tris.size()) && !flipped; ++t) {
        if (!tris[t].alive) continue;
        for (int e = 0; e < 3 && !flipped; ++e) {
          const int a = tris[t].v[(e + 1) % 3];
          const int b = tris[t].v[(e + 2) % 3];
          if (a == u || a == v || b == u || b == v) continue;
          const Vec2 A = pts[a], B = pts[b];
          const double d1 = cross(V - U, A - U), d2 = cross(V - U, B - U);
          const double d3 = cross(B - A, U - A), d4 = cross(B - A, V - A);
          if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)))
            flipped = flip(t, e);
        }
      }
      if (!flipped)
        throw std::runtime_error("triangulate: failed to recover boundary edge");
    }
    throw std::runtime_error("triangulate: edge recovery did not terminate");
  }

 private:
  int super0_ = -1;
  int hint_ = 0;
  mutable std::vector<int> stamp_;
  int epoch_ = 0;

  void mark(int t) {
    if (static_cast<int>(stamp_.size()) < static_cast<int>(tris.size()) + 8)
      stamp_.resize(tris.size() + 1024, 0);
    stamp_[t] = epoch_;
  }
  bool marked(int t) const {
    return t < static_cast<int>(stamp_.size()) && stamp_[t] == epoch_;
  }
  int first_alive() const {
    for (int t = static_cast<int>(tris.size()) - 1; t >= 0; --t)
      if (tris[t].alive) return t;
    throw std::logic_error("triangulate: no live triangles");
  }
  int scan(Vec2 p) const {
    int best = -1;
    double best_q = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      if (!tris[t].alive) continue;
      const Vec2 a = pts[tris[t].v[0]], b = pts[tris[t].v[1]], c = pts[tris[t].v[2]];
      const double a2 = cross(b - a, c - a);
      if (a2 <= 0) continue;
      const double l0 = cross(b - p, c - p) / a2;
      const double l1 = cross(c - p, a - p) / a2;
      const double l2 = cross(a - p, b - p) / a2;
      const double q = std::min({l0, l1, l2});
      if (q > best_q) {
        best_q = q;
        best = t;
      }
    }
    if (best < 0) throw std::logic_error("triangulate: point location failed");
    return best;
  }
};

struct BoundarySetup {
  std::vector<Vec2> points;                      // ordered around the polygon
  std::vector<std::array<int, 2>> segments;      // consecutive point pairs
  std::vector<BoundaryTag> segment_tags;
};

BoundarySetup sample_boundary(const Domain& dom, double h) {
  BoundarySetup bs;
  const int n = dom.num_vertices();
  std::vector<int> first_point(n);
  for (int i = 0; i < n; ++i) {
    const Vec2 a = dom.vertex(i), b = dom.vertex((i + 1) % n);
    const double len = dist(a, b);
    const int ne = std::max(1, static_cast<int>(std::ceil(len / (0.95 * h) - 1e-12)));
    first_point[i] = static_cast<int>(bs.points.size());
    for (int j = 0; j < ne; ++j)
      bs.points.push_back(a + (static_cast<double>(j) / ne) * (b - a));
  }
  const int np = static_cast<int>(bs.points.size());
  // Segment (k, k+1) lies on the polygon edge its first point samples.
  int edge = 0;
  for (int k = 0; k < np; ++k) {
    while (edge + 1 < n && first_point[edge + 1] <= k) ++edge;
    bs.segments.push_back({k, (k + 1) % np});
    bs.segment_tags.push_back(dom.edge_tag(edge));
  }
  return bs;
}

// ---------------------------------------------------------------------------
// Conforming red/green refinement
// ---------------------------------------------------------------------------

int longest_edge_slot(const Mesh& m, int t) {
  const auto& v = m.tris[t];
  int slot = 0;
  double best = -1.0;
  for (int e = 0; e < 3; ++e) {
    const double len = dist(m.nodes[v[(e + 1) % 3]], m.nodes[v[(e + 2) % 3]]);
    if (len > best * (1.0 + 1e-12)) {
      best = len;
      slot = e;
    }
  }
  return slot;
}

double longest_edge_length(const Mesh& m, int t) {
  const auto& v = m.tris[t];
  double best = 0.0;
  for (int e = 0; e < 3; ++e)
    best = std::max(best, dist(m.nodes[v[(e + 1) % 3]], m.nodes[v[(e + 2) % 3]]));
  return best;
}

// One conforming refinement sweep: triangles whose longest edge exceeds
// target(t) contribute that edge; marked triangles split red (all three
// edges) or green (single bisection).  Returns false when nothing exceeded
// its target.
bool refine_pass(Mesh& m, std::vector<char>& green,
                 const std::function<double(const Mesh&, int)>& target) {
  const int nt = m.num_tris();
  auto ekey = [](int a, int b) -> std::pair<int, int> {
    return {std::min(a, b), std::max(a, b)};
  };
  std::map<std::pair<int, int>, int> split;  // edge -> midpoint node (later)
  bool any = false;
  for (int t = 0; t < nt; ++t) {
    if (longest_edge_length(m, t) > target(m, t) * (1.0 + 1e-12)) {
      const int e = longest_edge_slot(m, t);
      split[ekey(m.tris[t][(e + 1) % 3], m.tris[t][(e + 2) % 3])] = -1;
      any = true;
    }
  }
  if (!any) return false;
  // Closure: a triangle with two marked edges, or a green child with any
  // marked edge, is split red.
  bool changed = true;
  while (changed) {
    changed = false;
    for (int t = 0; t < nt; ++t) {
      int cnt = 0;
      for (int e = 0; e < 3; ++e)
        cnt += split.count(ekey(m.tris[t][(e + 1) % 3], m.tris[t][(e + 2) % 3])) ? 1 : 0;
      if (cnt == 0 || cnt == 3) continue;
      if (cnt >= 2 || green[t]) {
        for (int e = 0; e < 3; ++e)
          if (!split.count(ekey(m.tris[t][(e + 1) % 3], m.tris[t][(e + 2) % 3]))) {
            split[ekey(m.tris[t][(e + 1) % 3], m.tris[t][(e + 2) % 3])] = -1;
            changed = true;
          }
      }
    }
  }
  for (auto& [key, node] : split) {
    node = m.num_nodes();
    m.nodes.push_back(0.5 * (m.nodes[key.first] + m.nodes[key.second]));
  }
  // Boundary edges split in place (midpoints stay on the straight arcs).
  std::vector<Mesh::BEdge> nbed;
  for (const auto& be : m.bedges) {
    const auto it = split.find(ekey(be.a, be.b));
    if (it == split.end()) {
      nbed.push_back(be);
    } else {
      nbed.push_back({be.a, it->second, be.tag});
      nbed.push_back({it->second, be.b, be.tag});
    }
  }
  m.bedges = std::move(nbed);
  std::vector<std::array<int, 3>> ntris;
  std::vector<char> ngreen;
  for (int t = 0; t < nt; ++t) {
    const auto& v = m.tris[t];
    int mid[3];
    int cnt = 0;
    for (int e = 0; e < 3; ++e) {
      const auto it = split.find(ekey(v[(e + 1) % 3], v[(e + 2) % 3]));
      mid[e] = it == split.end() ? -1 : it->second;
      cnt += mid[e] >= 0 ? 1 : 0;
    }
    if (cnt == 0) {
      ntris.push_back(v);
      ngreen.push_back(green[t]);
    } else if (cnt == 3) {
      ntris.push_back({v[0], mid[2], mid[1]});
      ntris.push_back({v[1], mid[0], mid[2]});
      ntris.push_back({v[2], mid[1], mid[0]});
      ntris.push_back({mid[0], mid[1], mid[2]});
      for (int k = 0; k < 4; ++k) ngreen.push_back(0);
    } else {
      int e = 0;
      while (mid[e] < 0) ++e;
      ntris.push_back({v[e], v[(e + 1) % 3], mid[e]});
      ntris.push_back({v[e], mid[e], v[(e + 2) % 3]});
      ngreen.push_back(1);
      ngreen.push_back(1);
    }
  }
  m.tris = std::move(ntris);
  green = std::move(ngreen);
  return true;
}

void refine_until(Mesh& m, const std::function<double(const Mesh&, int)>& target,
                  int max_passes) {
  std::vector<char> green(m.num_tris(), 0);
  for (int pass = 0; pass < max_passes; ++pass)
    if (!refine_pass(m, green, target)) return;
  throw std::runtime_error("mesh refinement did not reach its size targets");
}

}  // namespace

Mesh triangulate(const Domain& dom, double h) {
  if (!(h > 0.0) || h >= dom.diameter())
    throw std::invalid_argument("triangulate: h must lie in (0, diameter)");
  const BoundarySetup bs = sample_boundary(dom, h);

  Delaunay del;
  del.pts = bs.points;
  // Interior lattice, clipped away from the boundary; deterministic jitter
  // breaks the cocircular grid degeneracies.
  Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
  for (const Vec2& p : dom.vertices()) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  const double s = 0.72 * h;
  const double dy = s * std::sqrt(3.0) / 2.0;
  const double margin = 0.42 * h;
  const int jmax = static_cast<int>((hi.y - lo.y) / dy) + 2;
  const int imax = static_cast<int>((hi.x - lo.x) / s) + 2;
  for (int j = 0; j <= jmax; ++j) {
    const double y = lo.y + dy * (j + 0.5);
    for (int i = 0; i <= imax; ++i) {
      const double x = lo.x + s * (i + 0.25 + 0.5 * (j % 2));
      const uint64_t hsh = mix64((uint64_t(uint32_t(i)) << 32) | uint32_t(j));
      const double jx = (double((hsh >> 11) & 0xffffff) / 0xffffff - 0.5) * 2e-7 * s;
      const double jy = (double((hsh >> 35) & 0xffffff) / 0xffffff - 0.5) * 2e-7 * s;
      const Vec2 p{x + jx, y + jy};
      if (p.x > hi.x || p.y > hi.y) continue;
      if (!dom.contains(p, 0.0)) continue;
      if (dom.dist_to_boundary(p) < margin) continue;
      del.pts.push_back(p);
    }
  }
  const int nreal = static_cast<int>(del.pts.size());
  del.init_super(lo - Vec2{h, h}, hi + Vec2{h, h});
  for (int ip = 0; ip < nreal; ++ip) del.insert(ip);
  for (const auto& seg : bs.segments) del.recover_edge(seg[0], seg[1]);

  // Outside classification: flood from the super-triangle without crossing
  // constrained segments.
  std::set<std::pair<int, int>> constrained;
  for (const auto& seg : bs.segments)
    constrained.insert(std::minmax(seg[0], seg[1]));
  const int ntr = static_cast<int>(del.tris.size());
  std::vector<char> outside(ntr, 0);
  std::vector<int> stack;
  for (int t = 0; t < ntr; ++t) {
    if (!del.tris[t].alive) continue;
    for (int k = 0; k < 3; ++k)
      if (del.tris[t].v[k] >= nreal && !outside[t]) {
        outside[t] = 1;
        stack.push_back(t);
      }
  }
  while (!stack.empty()) {
    const int t = stack.back();
    stack.pop_back();
    for (int e = 0; e < 3; ++e) {
      const int n = del.tris[t].nb[e];
      if (n < 0 || outside[n] || !del.tris[n].alive) continue;
      const int a = del.tris[t].v[(e + 1) % 3], b = del.tris[t].v[(e + 2) % 3];
      if (constrained.count(std::minmax(a, b))) continue;
      outside[n] = 1;
      stack.push_back(n);
    }
  }

  Mesh m;
  m.target_h = h;
  std::vector<int> remap(del.pts.size(), -1);
  for (int t = 0; t < ntr; ++t) {
    if (!del.tris[t].alive || outside[t]) continue;
    for (int k = 0; k < 3; ++k) remap[del.tris[t].v[k]] = 0;
  }
  for (int i = 0; i < static_cast<int>(del.pts.size()); ++i)
    if (remap[i] == 0) {
      remap[i] = m.num_nodes();
      m.nodes.push_back(del.pts[i]);
    }
  std::map<std::pair<int, int>, BoundaryTag> seg_tag;
  for (std::size_t k = 0; k < bs.segments.size(); ++k)
    seg_tag[std::minmax(bs.segments[k][0], bs.segments[k][1])] = bs.segment_tags[k];
  for (int t = 0; t < ntr; ++t) {
    if (!del.tris[t].alive || outside[t]) continue;
    std::array<int, 3> v = {remap[del.tris[t].v[0]], remap[del.tris[t].v[1]],
                            remap[del.tris[t].v[2]]};
    if (cross(m.nodes[v[1]] - m.nodes[v[0]], m.nodes[v[2]] - m.nodes[v[0]]) < 0.0)
      std::swap(v[1], v[2]);
    m.tris.push_back(v);
    // Boundary edges: sides whose Delaunay neighbor is outside.
    for (int e = 0; e < 3; ++e) {
      const int n = del.tris[t].nb[e];
      if (n >= 0 && del.tris[n].alive && !outside[n]) continue;
      const int a = del.tris[t].v[(e + 1) % 3], b = del.tris[t].v[(e + 2) % 3];
      const auto it = seg_tag.find(std::minmax(a, b));
      if (it == seg_tag.end())
        throw std::runtime_error("triangulate: untagged boundary edge");
      m.bedges.push_back({remap[a], remap[b], it->second});
    }
  }
  if (m.tris.empty()) throw std::runtime_error("triangulate: empty mesh");
  // Cap every edge at h (transition layers can slightly overshoot).
  refine_until(
      m, [h](const Mesh&, int) { return h; }, 40);
  return m;
}

void refine_toward(Mesh& m, const Domain& dom, Vec2 x, int levels) {
  if (levels <= 0) return;
  const double h = m.target_h;
  const double r0 = dom.r0();
  refine_until(
      m,
      [&, h, r0, levels](const Mesh& mm, int t) {
        const auto& v = mm.tris[t];
        double d = std::numeric_limits<double>::infinity();
        for (int e = 0; e < 3; ++e)
          d = std::min(d, segment_distance(x, mm.nodes[v[e]],
                                           mm.nodes[v[(e + 1) % 3]]));
        const Vec2 a = mm.nodes[v[0]], b = mm.nodes[v[1]], c = mm.nodes[v[2]];
        const double a2 = cross(b - a, c - a);
        if (cross(b - x, c - x) >= 0 && cross(c - x, a - x) >= 0 &&
            cross(a - x, b - x) >= 0 && a2 > 0)
          d = 0.0;
        double target = h;
        for (int k = 1; k <= levels; ++k)
          if (d <= r0 * std::pow(0.5, k)) target = h * std::pow(0.5, k);
        return target;
      },
      40 + 4 * levels);
}

VerificationReport check_mesh(const Mesh& m, const Domain& dom) {
  VerificationReport rep;
  rep.kind = "mesh";
  {
    std::ostringstream os;
    os << "nodes=" << m.num_nodes() << " tris=" << m.num_tris()
       << " h=" << m.target_h;
    rep.inputs = os.str();
  }
  bool ok = true;
  // Orientation and degeneracy.
  double min_area = std::numeric_limits<double>::infinity();
  for (int t = 0; t < m.num_tris(); ++t) min_area = std::min(min_area, tri_area(m, t));
  ok = ok && min_area > 0.0;
  rep.value("min_tri_area", min_area);
  // Conformity: every edge in at most two triangles; single-triangle edges
  // are exactly the tagged boundary edges.
  std::map<std::pair<int, int>, int> count;
  for (const auto& v : m.tris)
    for (int e = 0; e < 3; ++e) count[std::minmax(v[(e + 1) % 3], v[(e + 2) % 3])] += 1;
  int over = 0, lonely = 0;
  std::set<std::pair<int, int>> bset;
  for (const auto& be : m.bedges) bset.insert(std::minmax(be.a, be.b));
  for (const auto& [key, c] : count) {
    if (c > 2) ++over;
    if (c == 1 && !bset.count(key)) ++lonely;
  }
  int phantom = 0;
  for (const auto& key : bset)
    if (!count.count(key) || count.at(key) != 1) ++phantom;
  ok = ok && over == 0 && lonely == 0 && phantom == 0;
  rep.value("nonmanifold_edges", over);
  rep.value("untagged_boundary_edges", lonely);
  rep.value("bad_boundary_records", phantom);
  // Boundary nodes must sit on the polygon, with matching tags.
  double worst_offset = 0.0;
  int bad_tags = 0;
  for (const auto& be : m.bedges) {
    const Vec2 mid = 0.5 * (m.nodes[be.a] + m.nodes[be.b]);
    worst_offset = std::max(worst_offset, dom.dist_to_boundary(mid));
    int edge = 0;
    dom.closest_boundary_point(mid, &edge);
    if (dom.edge_tag(edge) != be.tag) ++bad_tags;
  }
  ok = ok && worst_offset <= 1e-9 * dom.diameter() && bad_tags == 0;
  rep.value("boundary_offset", worst_offset);
  rep.value("boundary_tag_mismatches", bad_tags);
  const double area_err = std::abs(total_area(m) - dom.area());
  ok = ok && area_err <= 1e-9 * dom.area();
  rep.value("area_error", area_err);
  const double hmax = max_edge_length(m);
  ok = ok && hmax <= m.target_h * (1.0 + 1e-9);
  rep.value("max_edge", hmax);
  rep.value("min_angle_deg", min_angle_degrees(m));
  rep.threshold("max_edge", m.target_h);
  rep.pass = ok;
  return rep;
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

double integrate(const Mesh& m, const std::function<double(Vec2, int)>& f) {
  double s = 0.0;
  for (int t = 0; t < m.num_tris(); ++t) {
    const auto& v = m.tris[t];
    const double w = tri_area(m, t) / 3.0;
    for (int e = 0; e < 3; ++e)
      s += w * f(0.5 * (m.nodes[v[e]] + m.nodes[v[(e + 1) % 3]]), t);
  }
  return s;
}

double boundary_integrate(const Mesh& m,
                          const std::function<double(Vec2, const Mesh::BEdge&)>& f,
                          std::optional<BoundaryTag> tag) {
  double s = 0.0;
  const double g = 0.5 / std::sqrt(3.0);
  for (const auto& be : m.bedges) {
    if (tag && be.tag != *tag) continue;
    const Vec2 a = m.nodes[be.a], b = m.nodes[be.b];
    const double w = 0.5 * dist(a, b);
    s += w * f(a + (0.5 - g) * (b - a), be);
    s += w * f(a + (0.5 + g) * (b - a), be);
  }
  return s;
}

namespace {

// -1 disjoint, 0 cut, 1 fully inside the disk.
int classify_tri(const Mesh& m, int t, Vec2 c, double rho) {
  const auto& v = m.tris[t];
  const Vec2 a = m.nodes[v[0]], b = m.nodes[v[1]], d = m.nodes[v[2]];
  const bool i0 = dist(a, c) <= rho, i1 = dist(b, c) <= rho, i2 = dist(d, c) <= rho;
  if (i0 && i1 && i2) return 1;
  double dmin = std::min({segment_distance(c, a, b), segment_distance(c, b, d),
                          segment_distance(c, d, a)});
  const double a2 = cross(b - a, d - a);
  if (a2 > 0 && cross(b - c, d - c) >= 0 && cross(d - c, a - c) >= 0 &&
      cross(a - c, b - c) >= 0)
    dmin = 0.0;
  return dmin > rho ? -1 : 0;
}

}  // namespace

std::vector<QuadPoint> region_quadrature(const Mesh& m, Vec2 c, double rho) {
  std::vector<QuadPoint> out;
  for (int t = 0; t < m.num_tris(); ++t) {
    const int cls = classify_tri(m, t, c, rho);
    if (cls < 0) continue;
    const auto& v = m.tris[t];
    if (cls > 0) {
      const double w = tri_area(m, t) / 3.0;
      for (int e = 0; e < 3; ++e)
        out.push_back({0.5 * (m.nodes[v[e]] + m.nodes[v[(e + 1) % 3]]), w});
    } else {
      disk_triangle_quadrature(c, rho, m.nodes[v[0]], m.nodes[v[1]], m.nodes[v[2]],
                               out);
    }
  }
  return out;
}

double region_area(const Mesh& m, Vec2 c, double rho) {
  double s = 0.0;
  for (int t = 0; t < m.num_tris(); ++t) {
    const int cls = classify_tri(m, t, c, rho);
    if (cls < 0) continue;
    const auto& v = m.tris[t];
    if (cls > 0)
      s += tri_area(m, t);
    else
      s += disk_triangle_moments(c, rho, m.nodes[v[0]], m.nodes[v[1]], m.nodes[v[2]])
               .area;
  }
  return s;
}

std::vector<double> hat_moments(const Mesh& m, Vec2 c, double rho) {
  std::vector<double> out(m.num_nodes(), 0.0);
  for (int t = 0; t < m.num_tris(); ++t) {
    const int cls = classify_tri(m, t, c, rho);
    if (cls < 0) continue;
    const auto& v = m.tris[t];
    const Vec2 p[3] = {m.nodes[v[0]], m.nodes[v[1]], m.nodes[v[2]]};
    const double twoA = cross(p[1] - p[0], p[2] - p[0]);
    RegionMoments mom;
    if (cls > 0) {
      mom.area = 0.5 * twoA;
      const Vec2 g = tri_centroid(m, t);
      mom.mx = mom.area * g.x;
      mom.my = mom.area * g.y;
    } else {
      mom = disk_triangle_moments(c, rho, p[0], p[1], p[2]);
    }
    for (int k = 0; k < 3; ++k) {
      const Vec2 p1 = p[(k + 1) % 3], p2 = p[(k + 2) % 3];
      const Vec2 d = p2 - p1;
      // hat_k(q) = (cross(p1,p2) + d.x q.y - d.y q.x) / twoA
      out[v[k]] +=
          (cross(p1, p2) * mom.area + d.x * mom.my - d.y * mom.mx) / twoA;
    }
  }
  return out;
}

std::vector<QuadPoint> boundary_region_quadrature(const Mesh& m, Vec2 c,
                                                  double rho,
                                                  std::optional<BoundaryTag> tag) {
  std::vector<QuadPoint> out;
  const double g = 0.5 / std::sqrt(3.0);
  for (const auto& be : m.bedges) {
    if (tag && be.tag != *tag) continue;
    const Vec2 a = m.nodes[be.a], b = m.nodes[be.b];
    const Vec2 d = b - a;
    const double qa = dot(d, d);
    if (qa <= 0.0) continue;
    const double qb = 2.0 * dot(a - c, d);
    const double qc = dot(a - c, a - c) - rho * rho;
    const double disc = qb * qb - 4.0 * qa * qc;
    double t0 = 0.0, t1 = 1.0;
    if (disc <= 0.0) {
      if (qc > 0.0) continue;
    } else {
      const double sq = std::sqrt(disc);
      t0 = std::max(0.0, (-qb - sq) / (2.0 * qa));
      t1 = std::min(1.0, (-qb + sq) / (2.0 * qa));
      if (t1 - t0 <= 1e-14) continue;
    }
    const double w = 0.5 * (t1 - t0) * std::sqrt(qa);
    out.push_back({a + (t0 + (0.5 - g) * (t1 - t0)) * d, w});
    out.push_back({a + (t0 + (0.5 + g) * (t1 - t0)) * d, w});
  }
  return out;
}

double d_adapted_average(const Mesh& m, const LocalDomain& ld,
                         const std::function<double(Vec2, int)>& f) {
  if (ld.touches_D) return 0.0;
  double num = 0.0, den = 0.0;
  for (int t = 0; t < m.num_tris(); ++t) {
    const int cls = classify_tri(m, t, ld.center, ld.rho);
    if (cls < 0) continue;
    const auto& v = m.tris[t];
    std::vector<QuadPoint> q;
    if (cls > 0) {
      const double w = tri_area(m, t) / 3.0;
      for (int e = 0; e < 3; ++e)
        q.push_back({0.5 * (m.nodes[v[e]] + m.nodes[v[(e + 1) % 3]]), w});
    } else {
      disk_triangle_quadrature(ld.center, ld.rho, m.nodes[v[0]], m.nodes[v[1]],
                               m.nodes[v[2]], q);
    }
    for (const QuadPoint& qp : q) {
      num += qp.w * f(qp.p, t);
      den += qp.w;
    }
  }
  if (den <= 0.0)
    throw std::runtime_error("d_adapted_average: empty local region");
  return num / den;
}

// ---------------------------------------------------------------------------
// Point location
// ---------------------------------------------------------------------------

Locator::Locator(const Mesh& m) : mesh_(m) {
  lo_ = {1e300, 1e300};
  hi_ = {-1e300, -1e300};
  for (const Vec2& p : m.nodes) {
    lo_.x = std::min(lo_.x, p.x);
    lo_.y = std::min(lo_.y, p.y);
    hi_.x = std::max(hi_.x, p.x);
    hi_.y = std::max(hi_.y, p.y);
  }
  const double w = std::max(hi_.x - lo_.x, 1e-12), hgt = std::max(hi_.y - lo_.y, 1e-12);
  cell_ = std::max(max_edge_length(m), std::max(w, hgt) / 256.0);
  nx_ = std::max(1, static_cast<int>(std::ceil(w / cell_)));
  ny_ = std::max(1, static_cast<int>(std::ceil(hgt / cell_)));
  bins_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  for (int t = 0; t < m.num_tris(); ++t) {
    Vec2 tlo{1e300, 1e300}, thi{-1e300, -1e300};
    for (int k = 0; k < 3; ++k) {
      const Vec2 p = m.nodes[m.tris[t][k]];
      tlo.x = std::min(tlo.x, p.x);
      tlo.y = std::min(tlo.y, p.y);
      thi.x = std::max(thi.x, p.x);
      thi.y = std::max(thi.y, p.y);
    }
    const int i0 = std::clamp(static_cast<int>((tlo.x - lo_.x) / cell_), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>((thi.x - lo_.x) / cell_), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>((tlo.y - lo_.y) / cell_), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>((thi.y - lo_.y) / cell_), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
        bins_[static_cast<std::size_t>(j) * nx_ + i].push_back(t);
  }
}

int Locator::locate(Vec2 p, std::array<double, 3>* bary) const {
  auto try_tri = [&](int t, double* q, std::array<double, 3>* l) {
    const auto& v = mesh_.tris[t];
    const Vec2 a = mesh_.nodes[v[0]], b = mesh_.nodes[v[1]], c = mesh_.nodes[v[2]];
    const double a2 = cross(b - a, c - a);
    if (a2 <= 0) {
      *q = -1e300;
      return;
    }
    (*l)[0] = cross(b - p, c - p) / a2;
    (*l)[1] = cross(c - p, a - p) / a2;
    (*l)[2] = cross(a - p, b - p) / a2;
    *q = std::min({(*l)[0], (*l)[1], (*l)[2]});
  };
  int best = -1;
  double best_q = -1e300;
  std::array<double, 3> best_l{};
  const int ci = std::clamp(static_cast<int>((p.x - lo_.x) / cell_), 0, nx_ - 1);
  const int cj = std::clamp(static_cast<int>((p.y - lo_.y) / cell_), 0, ny_ - 1);
  for (int j = std::max(0, cj - 1); j <= std::min(ny_ - 1, cj + 1); ++j) {
    for (int i = std::max(0, ci - 1); i <= std::min(nx_ - 1, ci + 1); ++i) {
      for (int t : bins_[static_cast<std::size_t>(j) * nx_ + i]) {
        double q;
        std::array<double, 3> l;
        try_tri(t, &q, &l);
        if (q > best_q) {
          best_q = q;
          best = t;
          best_l = l;
        }
        if (best_q >= 0.0) break;
      }
      if (best_q >= 0.0) break;
    }
    if (best_q >= 0.0) break;
  }
  if (best_q < -1e-6) {
    // Rare: walk the whole mesh (points near slivers or outside).
    for (int t = 0; t < mesh_.num_tris(); ++t) {
      double q;
      std::array<double, 3> l;
      try_tri(t, &q, &l);
      if (q > best_q) {
        best_q = q;
        best = t;
        best_l = l;
      }
    }
  }
  if (best < 0 || best_q < -1e-6)
    throw std::runtime_error("locate: point outside the mesh");
  if (bary) {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) {
      best_l[k] = std::max(best_l[k], 0.0);
      s += best_l[k];
    }
    for (int k = 0; k < 3; ++k) best_l[k] /= s;
    *bary = best_l;
  }
  return best;
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

Mesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path);
  Mesh m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    auto fail = [&](const std::string& why) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + why);
    };
    if (tok == "n") {
      Vec2 p;
      if (!(ls >> p.x >> p.y)) fail("expected 'n x y'");
      m.nodes.push_back(p);
    } else if (tok == "t") {
      std::array<int, 3> v;
      if (!(ls >> v[0] >> v[1] >> v[2])) fail("expected 't i j k'");
      m.tris.push_back(v);
    } else if (tok == "b") {
      Mesh::BEdge be;
      std::string tag;
      if (!(ls >> be.a >> be.b >> tag)) fail("expected 'b i j TAG'");
      if (tag == "D")
        be.tag = BoundaryTag::D;
      else if (tag == "N")
        be.tag = BoundaryTag::N;
      else
        fail("boundary tag must be D or N");
      m.bedges.push_back(be);
    } else {
      fail("unknown record '" + tok + "'");
    }
  }
  for (const auto& v : m.tris)
    for (int k = 0; k < 3; ++k)
      if (v[k] < 0 || v[k] >= m.num_nodes())
        throw std::runtime_error(path + ": triangle node index out of range");
  m.target_h = max_edge_length(m);
  return m;
}

std::string format_mesh(const Mesh& m) {
  std::ostringstream os;
  char buf[96];
  for (const Vec2& p : m.nodes) {
    std::snprintf(buf, sizeof buf, "n %.17g %.17g\n", p.x, p.y);
    os << buf;
  }
  for (const auto& v : m.tris) os << "t " << v[0] << " " << v[1] << " " << v[2] << "\n";
  for (const auto& be : m.bedges)
    os << "b " << be.a << " " << be.b << " "
       << (be.tag == BoundaryTag::D ? "D" : "N") << "\n";
  return os.str();
}

void write_mesh(const Mesh& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file: " + path);
  out << format_mesh(m);
}

}  // namespace greenfem
