#include "greenfem/clip.hpp"

#include <algorithm>
#include <cmath>

namespace greenfem {

namespace {

struct SegPiece {
  Vec2 a, b;
  bool entry = false;  // walk enters the disk at a
  bool exit = false;   // walk leaves the disk at b
};

// Intersection of one ccw-ordered triangle boundary with the disk |p| <= r
// (circle already shifted to the origin).  Returns false when the
// configuration degenerates to "whole disk" or "empty": *full_disk says which.
bool boundary_pieces(double r, const Vec2 tri[3], std::vector<SegPiece>& pieces,
                     bool* full_disk) {
  const double scale = r + norm(tri[0]) + norm(tri[1]) + norm(tri[2]);
  const double teps = 1e-13;
  pieces.clear();
  for (int e = 0; e < 3; ++e) {
    const Vec2 p = tri[e], q = tri[(e + 1) % 3];
    const Vec2 d = q - p;
    const double qa = dot(d, d);
    if (qa <= 0.0) continue;
    const double qb = 2.0 * dot(p, d);
    const double qc = dot(p, p) - r * r;
    const double disc = qb * qb - 4.0 * qa * qc;
    double t0, t1;
    if (disc <= 0.0) {
      // No chord: the edge lies fully inside or fully outside.
      if (qc > 0.0) continue;
      t0 = 0.0;
      t1 = 1.0;
    } else {
      const double sq = std::sqrt(disc);
      t0 = std::max(0.0, (-qb - sq) / (2.0 * qa));
      t1 = std::min(1.0, (-qb + sq) / (2.0 * qa));
      if (t1 - t0 <= teps) continue;
    }
    SegPiece sp;
    sp.a = p + t0 * d;
    sp.b = p + t1 * d;
    sp.entry = t0 > teps;
    sp.exit = t1 < 1.0 - teps;
    // Guard against grazing contact classified as a chord.
    if (norm(sp.b - sp.a) <= 1e-14 * scale) continue;
    pieces.push_back(sp);
  }
  if (!pieces.empty()) return true;
  // Either the disk sits inside the triangle, or the two are disjoint.
  const double d0 = segment_distance({0, 0}, tri[0], tri[1]);
  const double d1 = segment_distance({0, 0}, tri[1], tri[2]);
  const double d2 = segment_distance({0, 0}, tri[2], tri[0]);
  const bool origin_inside = cross(tri[1] - tri[0], Vec2{0, 0} - tri[0]) >= 0 &&
                             cross(tri[2] - tri[1], Vec2{0, 0} - tri[1]) >= 0 &&
                             cross(tri[0] - tri[2], Vec2{0, 0} - tri[2]) >= 0;
  *full_disk = origin_inside && std::min({d0, d1, d2}) >= r * (1.0 - 1e-13);
  return false;
}

// Arc spans (from exit to the next entry, counterclockwise) induced by the
// pieces of the walk.
std::vector<std::pair<double, double>> arc_spans(
    const std::vector<SegPiece>& pieces) {
  struct Event {
    double angle;
    bool is_entry;
  };
  std::vector<Event> ev;
  for (const SegPiece& sp : pieces) {
    if (sp.entry) ev.push_back({std::atan2(sp.a.y, sp.a.x), true});
    if (sp.exit) ev.push_back({std::atan2(sp.b.y, sp.b.x), false});
  }
  std::vector<std::pair<double, double>> arcs;
  const int ne = static_cast<int>(ev.size());
  for (int i = 0; i < ne; ++i) {
    if (ev[i].is_entry) continue;
    // Walk order: events were pushed following the ccw traversal.
    for (int k = 1; k <= ne; ++k) {
      const Event& nx = ev[(i + k) % ne];
      if (nx.is_entry) {
        double dth = nx.angle - ev[i].angle;
        while (dth < 0.0) dth += 2.0 * M_PI;
        while (dth >= 2.0 * M_PI) dth -= 2.0 * M_PI;
        arcs.emplace_back(ev[i].angle, dth);
        break;
      }
    }
  }
  return arcs;
}

void orient_ccw(Vec2 tri[3]) {
  if (cross(tri[1] - tri[0], tri[2] - tri[0]) < 0.0) std::swap(tri[1], tri[2]);
}

bool balanced(const std::vector<SegPiece>& pieces) {
  int entries = 0, exits = 0;
  for (const SegPiece& sp : pieces) {
    entries += sp.entry ? 1 : 0;
    exits += sp.exit ? 1 : 0;
  }
  return entries == exits;
}

// Last-resort path for grazing/tangent configurations: clip a fine polygonal
// approximation of the circle against the triangle's half-planes.
std::vector<Vec2> fallback_polygon(double r, const Vec2 tri[3]) {
  const int n = 2048;
  std::vector<Vec2> poly(n);
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * M_PI * i / n;
    poly[i] = {r * std::cos(th), r * std::sin(th)};
  }
  for (int e = 0; e < 3 && !poly.empty(); ++e) {
    const Vec2 a = tri[e], b = tri[(e + 1) % 3];
    std::vector<Vec2> next;
    const int np = static_cast<int>(poly.size());
    for (int i = 0; i < np; ++i) {
      const Vec2 p = poly[i], q = poly[(i + 1) % np];
      const double sp = cross(b - a, p - a);
      const double sq = cross(b - a, q - a);
      if (sp >= 0.0) next.push_back(p);
      if ((sp > 0.0) != (sq > 0.0) && sp != sq)
        next.push_back(p + (sp / (sp - sq)) * (q - p));
    }
    poly = std::move(next);
  }
  return poly;
}

}  // namespace

RegionMoments disk_triangle_moments(Vec2 c, double r, Vec2 p0, Vec2 p1, Vec2 p2) {
  Vec2 tri[3] = {p0 - c, p1 - c, p2 - c};
  orient_ccw(tri);
  RegionMoments m;
  std::vector<SegPiece> pieces;
  bool full_disk = false;
  if (!boundary_pieces(r, tri, pieces, &full_disk)) {
    if (full_disk) {
      m.area = M_PI * r * r;
      m.mx = m.area * c.x;
      m.my = m.area * c.y;
    }
    return m;
  }
  if (!balanced(pieces)) {
    RegionMoments fm;
    const auto poly = fallback_polygon(r, tri);
    const int np = static_cast<int>(poly.size());
    for (int i = 0; i < np; ++i) {
      const Vec2 a = poly[i], b = poly[(i + 1) % np];
      const double s = 0.5 * cross(a, b);
      fm.area += s;
      fm.mx += s * (a.x + b.x) / 3.0;
      fm.my += s * (a.y + b.y) / 3.0;
    }
    fm.mx += c.x * fm.area;
    fm.my += c.y * fm.area;
    return fm;
  }
  double A = 0.0, Mx = 0.0, My = 0.0;
  for (const SegPiece& sp : pieces) {
    const Vec2 a = sp.a, d = sp.b - sp.a;
    A += 0.5 * cross(a, sp.b);
    Mx += 0.5 * d.y * (a.x * a.x + a.x * d.x + d.x * d.x / 3.0);
    My += -0.5 * d.x * (a.y * a.y + a.y * d.y + d.y * d.y / 3.0);
  }
  for (const auto& [alpha, dth] : arc_spans(pieces)) {
    const double beta = alpha + dth;
    A += 0.5 * r * r * dth;
    auto icos3 = [](double t) { return std::sin(t) - std::pow(std::sin(t), 3) / 3.0; };
    auto isin3 = [](double t) { return -std::cos(t) + std::pow(std::cos(t), 3) / 3.0; };
    Mx += 0.5 * r * r * r * (icos3(beta) - icos3(alpha));
    My += 0.5 * r * r * r * (isin3(beta) - isin3(alpha));
  }
  m.area = A;
  m.mx = Mx + c.x * A;
  m.my = My + c.y * A;
  return m;
}

void disk_triangle_quadrature(Vec2 c, double r, Vec2 p0, Vec2 p1, Vec2 p2,
                              std::vector<QuadPoint>& out) {
  Vec2 tri[3] = {p0 - c, p1 - c, p2 - c};
  orient_ccw(tri);
  std::vector<SegPiece> pieces;
  bool full_disk = false;
  if (!boundary_pieces(r, tri, pieces, &full_disk)) {
    if (!full_disk) return;
    // Polar rule with exact annular-sector weights.
    const int nr = 4, na = 12;
    for (int i = 0; i < nr; ++i) {
      const double r1 = r * i / nr, r2 = r * (i + 1) / nr;
      const double w = M_PI * (r2 * r2 - r1 * r1) / na;
      const double rc = (2.0 / 3.0) * (r2 * r2 * r2 - r1 * r1 * r1) /
                        (r2 * r2 - r1 * r1);
      for (int j = 0; j < na; ++j) {
        const double th = 2.0 * M_PI * (j + 0.5) / na;
        out.push_back({c + Vec2{rc * std::cos(th), rc * std::sin(th)}, w});
      }
    }
    return;
  }
  if (!balanced(pieces)) {
    const auto fpoly = fallback_polygon(r, tri);
    if (fpoly.size() < 3) return;
    Vec2 fg{0, 0};
    for (const Vec2& p : fpoly) fg = fg + p;
    fg = (1.0 / fpoly.size()) * fg;
    const int np = static_cast<int>(fpoly.size());
    for (int i = 0; i < np; ++i) {
      const Vec2 a = fpoly[i], b = fpoly[(i + 1) % np];
      const double area = 0.5 * cross(a - fg, b - fg);
      if (std::abs(area) < 1e-18 * (1.0 + r * r)) continue;
      out.push_back({c + 0.5 * (fg + a), area / 3.0});
      out.push_back({c + 0.5 * (a + b), area / 3.0});
      out.push_back({c + 0.5 * (b + fg), area / 3.0});
    }
    return;
  }
  // Fully inside the disk: plain edge-midpoint rule on the triangle.
  bool interior = true;
  for (const SegPiece& sp : pieces)
    if (sp.entry || sp.exit) interior = false;
  if (interior && pieces.size() == 3) {
    const double area = 0.5 * cross(tri[1] - tri[0], tri[2] - tri[0]);
    for (int e = 0; e < 3; ++e)
      out.push_back({c + 0.5 * (tri[e] + tri[(e + 1) % 3]), area / 3.0});
    return;
  }
  // Build the clip polygon (chords in place of arcs) plus the circular
  // segments left over between each chord and its arc.
  std::vector<Vec2> poly;
  auto push = [&](Vec2 p) {
    if (!poly.empty() && norm(poly.back() - p) < 1e-14 * (1.0 + r)) return;
    poly.push_back(p);
  };
  // Order: walk pieces, inserting arc subdivisions after each exit.
  const auto arcs = arc_spans(pieces);
  std::size_t arc_idx = 0;
  for (const SegPiece& sp : pieces) {
    push(sp.a);
    push(sp.b);
    if (sp.exit && arc_idx < arcs.size()) {
      const auto [alpha, dth] = arcs[arc_idx++];
      const int nsub = std::max(1, static_cast<int>(std::ceil(dth / 0.4)));
      for (int s = 0; s <= nsub; ++s) {
        const double th = alpha + dth * s / nsub;
        push({r * std::cos(th), r * std::sin(th)});
        if (s < nsub) {
          const double delta = dth / nsub;
          const double w = 0.5 * r * r * (delta - std::sin(delta));
          if (w > 1e-18 * r * r) {
            const double thm = alpha + dth * (s + 0.5) / nsub;
            double dc = delta > 1e-4 ? 4.0 * r * std::pow(std::sin(delta / 2), 3) /
                                           (3.0 * (delta - std::sin(delta)))
                                     : r;
            out.push_back({c + Vec2{dc * std::cos(thm), dc * std::sin(thm)}, w});
          }
        }
      }
    }
  }
  if (poly.size() >= 2 && norm(poly.front() - poly.back()) < 1e-14 * (1.0 + r))
    poly.pop_back();
  if (poly.size() < 3) return;
  Vec2 g{0, 0};
  for (const Vec2& p : poly) g = g + p;
  g = (1.0 / poly.size()) * g;
  const int np = static_cast<int>(poly.size());
  for (int i = 0; i < np; ++i) {
    const Vec2 a = poly[i], b = poly[(i + 1) % np];
    const double area = 0.5 * cross(a - g, b - g);
    if (std::abs(area) < 1e-18 * (1.0 + r * r)) continue;
    out.push_back({c + 0.5 * (g + a), area / 3.0});
    out.push_back({c + 0.5 * (a + b), area / 3.0});
    out.push_back({c + 0.5 * (b + g), area / 3.0});
  }
}

}  // namespace greenfem
