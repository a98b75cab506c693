#pragma once

#include <vector>

#include "greenfem/geometry.hpp"

namespace greenfem {

// Integrals of 1, x, y over a region.
struct RegionMoments {
  double area = 0.0;
  double mx = 0.0;
  double my = 0.0;
};

struct QuadPoint {
  Vec2 p;
  double w = 0.0;
};

// Exact moments of triangle(p0,p1,p2) intersected with the closed disk
// B_r(c), by Green's theorem over the straight and circular boundary pieces.
// Vertex orientation of the triangle does not matter.
RegionMoments disk_triangle_moments(Vec2 c, double r, Vec2 p0, Vec2 p1, Vec2 p2);

// Quadrature rule over the same intersection: weights sum to the exact area;
// exact for linear integrands, and accurate to the circular-segment
// resolution (arcs split into pieces of at most ~0.4 rad) beyond that.
// Points are appended to `out`.
void disk_triangle_quadrature(Vec2 c, double r, Vec2 p0, Vec2 p1, Vec2 p2,
                              std::vector<QuadPoint>& out);

}  // namespace greenfem
