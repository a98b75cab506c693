#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "greenfem/report.hpp"

namespace greenfem {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

// Distance from p to segment [a,b] and the closest point on it.
double segment_distance(Vec2 p, Vec2 a, Vec2 b, Vec2* closest = nullptr);

enum class BoundaryTag { D, N };

// A maximal run of boundary edges sharing one tag: edges (first, first+1),
// ..., (last-1, last) walking counterclockwise, indices mod vertex count.
struct Arc {
  int first = 0;
  int last = 0;
  BoundaryTag tag = BoundaryTag::D;
};

// Counterclockwise simple polygon with tagged boundary edges and the
// corkscrew parameters (M, r0).
class Domain {
 public:
  Domain() = default;
  Domain(std::vector<Vec2> vertices, std::vector<Arc> arcs, double M, double r0);

  int num_vertices() const { return static_cast<int>(verts_.size()); }
  const std::vector<Vec2>& vertices() const { return verts_; }
  Vec2 vertex(int i) const { return verts_[i]; }
  // Tag of boundary edge (i, i+1 mod n).
  BoundaryTag edge_tag(int i) const { return edge_tags_[i]; }
  const std::vector<Arc>& arcs() const { return arcs_; }

  double M() const { return M_; }
  double r0() const { return r0_; }
  double area() const { return area_; }
  double perimeter() const { return perimeter_; }
  double diameter() const { return diameter_; }

  bool has_tag(BoundaryTag t) const;

  // Point membership (closed region), with tolerance for points within
  // `tol` of the boundary.
  bool contains(Vec2 p, double tol = 1e-12) const;
  double dist_to_boundary(Vec2 p) const;
  // Closest point on the boundary; also reports the edge index.
  Vec2 closest_boundary_point(Vec2 p, int* edge = nullptr) const;
  // Distance from p to the union of edges carrying tag t (+inf if none).
  double dist_to_tag(Vec2 p, BoundaryTag t) const;

  // Vertices where the tag changes between the incoming and outgoing edge.
  std::vector<int> junction_vertices() const;

 private:
  std::vector<Vec2> verts_;
  std::vector<BoundaryTag> edge_tags_;
  std::vector<Arc> arcs_;
  double M_ = 1.0;
  double r0_ = 0.0;
  double area_ = 0.0;
  double perimeter_ = 0.0;
  double diameter_ = 0.0;
};

// Validating constructor used by file parsing and programmatic setup alike.
// Requires: ccw orientation, simple polygon, arcs partition the boundary,
// M >= 1, 0 < r0 <= diameter.
Domain build_domain(std::vector<Vec2> vertices, std::vector<Arc> arcs, double M,
                    double r0);

// Convenience constructions used across tests and the CLI.
Domain unit_square(BoundaryTag all = BoundaryTag::D, double M = 4.0,
                   double r0 = 0.25);
// Unit square with the bottom edge tagged `bottom` and the rest `others`.
Domain unit_square_bottom(BoundaryTag bottom, BoundaryTag others,
                          double M = 4.0, double r0 = 0.25);
// Regular n-gon approximation of the disk of radius R about c.
Domain regular_polygon_disk(Vec2 c, double R, int n,
                            BoundaryTag tag = BoundaryTag::D,
                            double M = 4.0, double r0 = 0.0);
// L-shaped hexagon (0,0),(2,0),(2,1),(1,1),(1,2),(0,2), all Dirichlet.
Domain l_shape(double M = 4.0, double r0 = 0.25);
// Unit square, Dirichlet on {y2=0, y1<=split}, Neumann elsewhere.
Domain zaremba_square(double split = 0.5, double M = 4.0, double r0 = 0.25);

// Domain file format:
//   v x y          vertex (ccw order)
//   arc i j TAG    boundary run from vertex i to vertex j, TAG in {D,N}
//   M <real>
//   r0 <real>
// '#' starts a comment.
Domain read_domain(const std::string& path);
std::string format_domain(const Domain& dom);
void write_domain(const Domain& dom, const std::string& path);

// B_rho(center) intersected with the domain.  For query points deeper than
// rho the disk is centered at the query point itself; otherwise the center
// is moved to the nearest boundary point.
struct LocalDomain {
  Vec2 query;          // the point x the region was requested at
  Vec2 center;         // x, or its boundary projection
  double rho = 0.0;
  bool boundary = false;   // center was moved to the boundary
  bool touches_D = false;  // region closure meets a Dirichlet arc
};

// Requires x in the closed domain and 0 < rho < 4*r0.
LocalDomain local_domain(const Domain& dom, Vec2 x, double rho);

// Corkscrew condition at the Dirichlet/Neumann junctions: for each junction
// vertex e and each dyadic radius r = r0/2^k (k = 0..n_radii-1), search the
// Dirichlet set within distance r of e for a witness point p with
// dist(p, N) >= r/M.  Vacuous pass when there are no junctions.
VerificationReport check_corkscrew(const Domain& dom, int n_radii = 6);

}  // namespace greenfem
