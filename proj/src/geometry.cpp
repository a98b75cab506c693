#include "greenfem/geometry.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace greenfem {

double segment_distance(Vec2 p, Vec2 a, Vec2 b, Vec2* closest) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec2 q = a + t * ab;
  if (closest) *closest = q;
  return dist(p, q);
}

namespace {

double polygon_signed_area(const std::vector<Vec2>& v) {
  double s = 0.0;
  const int n = static_cast<int>(v.size());
  for (int i = 0; i < n; ++i) s += cross(v[i], v[(i + 1) % n]);
  return 0.5 * s;
}

bool segments_properly_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 &&
         d3 != 0 && d4 != 0;
}

}  // namespace

Domain::Domain(std::vector<Vec2> vertices, std::vector<Arc> arcs, double M,
               double r0)
    : verts_(std::move(vertices)), arcs_(std::move(arcs)), M_(M), r0_(r0) {
  const int n = num_vertices();
  if (n < 3) throw std::invalid_argument("domain: need at least 3 vertices");
  const double sa = polygon_signed_area(verts_);
  if (!(sa > 0.0))
    throw std::invalid_argument("domain: vertices must be counterclockwise");
  area_ = sa;
  perimeter_ = 0.0;
  diameter_ = 0.0;
  for (int i = 0; i < n; ++i) {
    perimeter_ += dist(verts_[i], verts_[(i + 1) % n]);
    for (int j = i + 1; j < n; ++j)
      diameter_ = std::max(diameter_, dist(verts_[i], verts_[j]));
  }
  // Simplicity: no proper crossing between non-adjacent edges.
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_properly_intersect(verts_[i], verts_[(i + 1) % n], verts_[j],
                                      verts_[(j + 1) % n]))
        throw std::invalid_argument("domain: polygon is self-intersecting");
    }
  }
  // Arcs must cover every edge exactly once.
  edge_tags_.assign(n, BoundaryTag::D);
  std::vector<int> covered(n, 0);
  if (arcs_.empty()) throw std::invalid_argument("domain: no boundary arcs");
  for (const Arc& a : arcs_) {
    if (a.first < 0 || a.first >= n || a.last < 0 || a.last >= n)
      throw std::invalid_argument("domain: arc vertex index out of range");
    // A full loop (first == last) covers every edge once.
    int i = a.first;
    do {
      edge_tags_[i] = a.tag;
      covered[i] += 1;
      i = (i + 1) % n;
    } while (i != a.last);
  }
  for (int i = 0; i < n; ++i)
    if (covered[i] != 1)
      throw std::invalid_argument("domain: arcs must partition the boundary");
  if (!(M_ >= 1.0)) throw std::invalid_argument("domain: M must be >= 1");
  if (!(r0_ > 0.0 && r0_ <= diameter_))
    throw std::invalid_argument("domain: r0 must lie in (0, diameter]");
}

bool Domain::has_tag(BoundaryTag t) const {
  return std::any_of(edge_tags_.begin(), edge_tags_.end(),
                     [t](BoundaryTag e) { return e == t; });
}

bool Domain::contains(Vec2 p, double tol) const {
  if (dist_to_boundary(p) <= tol) return true;
  // Crossing-number test.
  bool inside = false;
  const int n = num_vertices();
  for (int i = 0; i < n; ++i) {
    const Vec2 a = verts_[i], b = verts_[(i + 1) % n];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xint = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (p.x < xint) inside = !inside;
    }
  }
  return inside;
}

double Domain::dist_to_boundary(Vec2 p) const {
  double best = std::numeric_limits<double>::infinity();
  const int n = num_vertices();
  for (int i = 0; i < n; ++i)
    best = std::min(best, segment_distance(p, verts_[i], verts_[(i + 1) % n]));
  return best;
}

Vec2 Domain::closest_boundary_point(Vec2 p, int* edge) const {
  double best = std::numeric_limits<double>::infinity();
  Vec2 bq = verts_[0];
  int be = 0;
  const int n = num_vertices();
  for (int i = 0; i < n; ++i) {
    Vec2 q;
    const double d = segment_distance(p, verts_[i], verts_[(i + 1) % n], &q);
    if (d < best) {
      best = d;
      bq = q;
      be = i;
    }
  }
  if (edge) *edge = be;
  return bq;
}

double Domain::dist_to_tag(Vec2 p, BoundaryTag t) const {
  double best = std::numeric_limits<double>::infinity();
  const int n = num_vertices();
  for (int i = 0; i < n; ++i)
    if (edge_tags_[i] == t)
      best = std::min(best, segment_distance(p, verts_[i], verts_[(i + 1) % n]));
  return best;
}

std::vector<int> Domain::junction_vertices() const {
  std::vector<int> out;
  const int n = num_vertices();
  for (int i = 0; i < n; ++i)
    if (edge_tags_[(i + n - 1) % n] != edge_tags_[i]) out.push_back(i);
  return out;
}

Domain build_domain(std::vector<Vec2> vertices, std::vector<Arc> arcs, double M,
                    double r0) {
  return Domain(std::move(vertices), std::move(arcs), M, r0);
}

Domain unit_square(BoundaryTag all, double M, double r0) {
  return Domain({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 0, all}}, M, r0);
}

Domain unit_square_bottom(BoundaryTag bottom, BoundaryTag others, double M,
                          double r0) {
  if (bottom == others) return unit_square(bottom, M, r0);
  return Domain({{0, 0}, {1, 0}, {1, 1}, {0, 1}},
                {{0, 1, bottom}, {1, 0, others}}, M, r0);
}

Domain regular_polygon_disk(Vec2 c, double R, int n, BoundaryTag tag, double M,
                            double r0) {
  std::vector<Vec2> v(n);
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * M_PI * i / n;
    v[i] = {c.x + R * std::cos(th), c.y + R * std::sin(th)};
  }
  if (r0 <= 0.0) r0 = 0.5 * R;
  return Domain(std::move(v), {{0, 0, tag}}, M, r0);
}

Domain l_shape(double M, double r0) {
  return Domain({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}},
                {{0, 0, BoundaryTag::D}}, M, r0);
}

Domain zaremba_square(double split, double M, double r0) {
  return Domain({{0, 0}, {split, 0}, {1, 0}, {1, 1}, {0, 1}},
                {{0, 1, BoundaryTag::D}, {1, 0, BoundaryTag::N}}, M, r0);
}

Domain read_domain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open domain file: " + path);
  std::vector<Vec2> verts;
  std::vector<Arc> arcs;
  double M = 1.0, r0 = 0.0;
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
    if (tok == "v") {
      Vec2 p;
      if (!(ls >> p.x >> p.y)) fail("expected 'v x y'");
      verts.push_back(p);
    } else if (tok == "arc") {
      Arc a;
      std::string tag;
      if (!(ls >> a.first >> a.last >> tag)) fail("expected 'arc i j TAG'");
      if (tag == "D")
        a.tag = BoundaryTag::D;
      else if (tag == "N")
        a.tag = BoundaryTag::N;
      else
        fail("arc tag must be D or N");
      arcs.push_back(a);
    } else if (tok == "M") {
      if (!(ls >> M)) fail("expected 'M <real>'");
    } else if (tok == "r0") {
      if (!(ls >> r0)) fail("expected 'r0 <real>'");
    } else {
      fail("unknown record '" + tok + "'");
    }
  }
  return Domain(std::move(verts), std::move(arcs), M, r0);
}

std::string format_domain(const Domain& dom) {
  std::ostringstream os;
  char buf[64];
  for (const Vec2& p : dom.vertices()) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g\n", p.x, p.y);
    os << buf;
  }
  for (const Arc& a : dom.arcs())
    os << "arc " << a.first << " " << a.last << " "
       << (a.tag == BoundaryTag::D ? "D" : "N") << "\n";
  std::snprintf(buf, sizeof buf, "M %.17g\n", dom.M());
  os << buf;
  std::snprintf(buf, sizeof buf, "r0 %.17g\n", dom.r0());
  os << buf;
  return os.str();
}

void write_domain(const Domain& dom, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write domain file: " + path);
  out << format_domain(dom);
}

LocalDomain local_domain(const Domain& dom, Vec2 x, double rho) {
  if (!(rho > 0.0 && rho < 4.0 * dom.r0()))
    throw std::invalid_argument("local_domain: rho must lie in (0, 4*r0)");
  if (!dom.contains(x, 1e-9 * dom.diameter()))
    throw std::invalid_argument("local_domain: point outside the domain");
  LocalDomain ld;
  ld.query = x;
  ld.rho = rho;
  const double db = dom.dist_to_boundary(x);
  if (db > rho) {
    ld.center = x;
    ld.boundary = false;
  } else {
    ld.center = dom.closest_boundary_point(x);
    ld.boundary = true;
  }
  ld.touches_D =
      dom.has_tag(BoundaryTag::D) && dom.dist_to_tag(ld.center, BoundaryTag::D) <= rho;
  return ld;
}

VerificationReport check_corkscrew(const Domain& dom, int n_radii) {
  VerificationReport rep;
  rep.kind = "corkscrew";
  {
    std::ostringstream os;
    os << "M=" << dom.M() << " r0=" << dom.r0() << " n_radii=" << n_radii;
    rep.inputs = os.str();
  }
  const auto junctions = dom.junction_vertices();
  rep.threshold("min_ratio", 1.0 / dom.M());
  if (junctions.empty()) {
    rep.pass = true;
    rep.note = "no D/N junctions; condition is vacuous";
    rep.value("worst_ratio", 1.0);
    return rep;
  }
  const int n = dom.num_vertices();
  double worst = std::numeric_limits<double>::infinity();
  for (int e : junctions) {
    const Vec2 pe = dom.vertex(e);
    std::vector<std::pair<std::string, double>> lvl;
    for (int k = 0; k < n_radii; ++k) {
      const double r = dom.r0() / double(1 << k);
      // Best witness on the Dirichlet set within distance r of the junction.
      double best = 0.0;
      for (int i = 0; i < n; ++i) {
        if (dom.edge_tag(i) != BoundaryTag::D) continue;
        const Vec2 a = dom.vertex(i), b = dom.vertex((i + 1) % n);
        // Parameter range of [a,b] inside B_r(pe).
        const Vec2 ab = b - a;
        const double qa = dot(ab, ab);
        const double qb = 2.0 * dot(a - pe, ab);
        const double qc = dot(a - pe, a - pe) - r * r;
        double t0 = 0.0, t1 = 1.0;
        if (qa > 0.0) {
          const double disc = qb * qb - 4.0 * qa * qc;
          if (disc < 0.0) continue;
          const double sq = std::sqrt(disc);
          t0 = std::max(0.0, (-qb - sq) / (2.0 * qa));
          t1 = std::min(1.0, (-qb + sq) / (2.0 * qa));
          if (t0 > t1) continue;
        } else if (qc > 0.0) {
          continue;
        }
        const int samples = 64;
        for (int s = 0; s <= samples; ++s) {
          const double t = t0 + (t1 - t0) * s / samples;
          const Vec2 p = a + t * ab;
          best = std::max(best, std::min(dom.dist_to_tag(p, BoundaryTag::N),
                                         1e9 * r));
        }
      }
      const double ratio = best / r;
      worst = std::min(worst, ratio);
      lvl.emplace_back("r=" + std::to_string(r), ratio);
    }
    rep.trace.emplace_back("junction_" + std::to_string(e), std::move(lvl));
  }
  rep.value("worst_ratio", worst);
  rep.pass = worst >= (1.0 / dom.M()) * (1.0 - 1e-9);
  return rep;
}

}  // namespace greenfem
