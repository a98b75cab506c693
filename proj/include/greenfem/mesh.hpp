#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "greenfem/clip.hpp"
#include "greenfem/geometry.hpp"
#include "greenfem/report.hpp"

namespace greenfem {

// Conforming triangle mesh of a polygonal domain.  Node and triangle order
// is a deterministic function of the construction inputs.
struct Mesh {
  struct BEdge {
    int a = 0;
    int b = 0;
    BoundaryTag tag = BoundaryTag::D;
  };

  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> tris;  // ccw vertex indices
  std::vector<BEdge> bedges;
  double target_h = 0.0;  // size parameter the mesh was built for

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_tris() const { return static_cast<int>(tris.size()); }
};

double tri_area(const Mesh& m, int t);
Vec2 tri_centroid(const Mesh& m, int t);
double max_edge_length(const Mesh& m);
double min_angle_degrees(const Mesh& m);
double total_area(const Mesh& m);

// Nodes lying on boundary edges with the given tag (junction nodes belong to
// both of their arcs' tags).
std::vector<char> nodes_on_tag(const Mesh& m, BoundaryTag tag);

// Delaunay triangulation constrained to the arc-split boundary, with a
// graded-free interior point lattice.  All boundary edges are at most h and
// every polygon vertex is a mesh node.
Mesh triangulate(const Domain& dom, double h);

// Graded refinement: after the call, edges within distance 2^-k * r0 of x
// have length at most target_h * 2^-k, for k = 1..levels.  Conformity is
// preserved; refined regions may drop below the unrefined angle quality.
void refine_toward(Mesh& m, const Domain& dom, Vec2 x, int levels);

// Structural soundness: conformity, orientation, boundary tagging, area,
// edge-length and angle measures.
VerificationReport check_mesh(const Mesh& m, const Domain& dom);

// Composite quadrature, exact for piecewise-quadratic integrands.
double integrate(const Mesh& m, const std::function<double(Vec2, int)>& f);
// 2-point Gauss per boundary edge; `tag` filters the edges (all if absent).
double boundary_integrate(const Mesh& m,
                          const std::function<double(Vec2, const Mesh::BEdge&)>& f,
                          std::optional<BoundaryTag> tag = std::nullopt);

// Quadrature decomposition of B_rho(c) intersected with the meshed domain.
// Weights sum to the exact clipped area.
std::vector<QuadPoint> region_quadrature(const Mesh& m, Vec2 c, double rho);
double region_area(const Mesh& m, Vec2 c, double rho);
// Exact integrals of every P1 hat function over the clipped region.
std::vector<double> hat_moments(const Mesh& m, Vec2 c, double rho);
// Arclength quadrature of the boundary pieces inside B_rho(c).
std::vector<QuadPoint> boundary_region_quadrature(
    const Mesh& m, Vec2 c, double rho,
    std::optional<BoundaryTag> tag = std::nullopt);

// Mean prescribed by the Dirichlet-adapted convention: zero whenever the
// region reaches a Dirichlet arc, the plain region average otherwise.
double d_adapted_average(const Mesh& m, const LocalDomain& ld,
                         const std::function<double(Vec2, int)>& f);

// P1 point location with a uniform-grid accelerator.
class Locator {
 public:
  explicit Locator(const Mesh& m);
  // Containing triangle and barycentric coordinates; tolerates boundary
  // round-off.  Throws if p lies outside the mesh.
  int locate(Vec2 p, std::array<double, 3>* bary = nullptr) const;

 private:
  const Mesh& mesh_;
  Vec2 lo_, hi_;
  double cell_ = 0.0;
  int nx_ = 0, ny_ = 0;
  std::vector<std::vector<int>> bins_;
};

/// Mesh file format:
//   n x y      node (in order)
//   t i j k    triangle
//   b i j TAG  boundary edge, TAG in {D,N}
Mesh read_mesh(const std::string& path);
std::string format_mesh(const Mesh& m);
void write_mesh(const Mesh& m, const std::string& path);

}  // namespace greenfem
