#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <memory>

#include "greenfem/solve.hpp"

using namespace greenfem;

namespace {
FemSolution poisson_square(double h) {
  static std::map<double, std::pair<Mesh, std::unique_ptr<MixedEngine>>> cache;
  auto it = cache.find(h);
  if (it == cache.end()) {
    Mesh mesh = triangulate(unit_square(), h);
    auto res = cache.emplace(h, std::make_pair(std::move(mesh), nullptr));
    it = res.first;
    it->second.second =
        std::make_unique<MixedEngine>(it->second.first, laplace_coefficients());
  }
  const MixedEngine& eng = *it->second.second;
  auto f_one = [](Vec2, double* v) { v[0] = 1.0; };
  return eng.solve(assemble_load(eng.mesh(), 1, f_one, nullptr));
}
}  // namespace

TEST_CASE("square membrane under unit load: center value") {
  // Reference center value for the unit-source problem on the unit square
  // with a homogeneous Dirichlet boundary: -0.0736713532...
  const double ref = -0.07367135;
  const FemSolution u2 = poisson_square(0.04);
  const FemSolution u1 = poisson_square(0.02);
  const double e2 = std::abs(u2.eval({0.5, 0.5}, 0) - ref);
  const double e1 = std::abs(u1.eval({0.5, 0.5}, 0) - ref);
  CHECK(e1 < 5e-4);
  CHECK(e1 <= 0.5 * e2 + 1e-6);  // second-order decay at the center
  CHECK(u1.residual <= 1e-10);
}

TEST_CASE("disk membrane under unit load: center value -1/4") {
  const Domain disk = regular_polygon_disk({0, 0}, 1.0, 256);
  const Mesh mesh = triangulate(disk, 0.04);
  MixedEngine eng(mesh, laplace_coefficients());
  auto f_one = [](Vec2, double* v) { v[0] = 1.0; };
  const FemSolution u = eng.solve(assemble_load(mesh, 1, f_one, nullptr));
  CHECK(u.eval({0, 0}, 0) == doctest::Approx(-0.25).epsilon(4e-3));
  // Radial profile (r^2 - 1)/4 at a midpoint radius.
  CHECK(u.eval({0.5, 0}, 0) == doctest::Approx((0.25 - 1.0) / 4.0).epsilon(6e-3));
}

TEST_CASE("manufactured smooth solution converges at second order") {
  const double k = M_PI;
  auto exact = [k](Vec2 p) { return std::sin(k * p.x) * std::sin(k * p.y); };
  auto f = [k](Vec2 p, double* v) {
    v[0] = -2.0 * k * k * std::sin(k * p.x) * std::sin(k * p.y);
  };
  double err[2];
  int idx = 0;
  for (double h : {0.08, 0.04}) {
    const Mesh mesh = triangulate(unit_square(), h);
    MixedEngine eng(mesh, laplace_coefficients());
    const FemSolution u = eng.solve(assemble_load(mesh, 1, f, nullptr));
    double e = 0.0;
    for (double x = 0.1; x < 0.95; x += 0.2)
      for (double y = 0.1; y < 0.95; y += 0.2)
        e = std::max(e, std::abs(u.eval({x, y}, 0) - exact({x, y})));
    err[idx++] = e;
  }
  CHECK(err[1] < 0.35 * err[0]);
  CHECK(err[1] < 6e-3);
}

TEST_CASE("mixed boundary data reproduces a linear field exactly") {
  const Domain dom = unit_square_bottom(BoundaryTag::D, BoundaryTag::N);
  const Mesh mesh = triangulate(dom, 0.11);
  MixedEngine eng(mesh, laplace_coefficients());
  // u = y2 vanishes on the bottom; conormal data on the other three sides.
  auto f_N = [](Vec2 p, double* v) {
    if (p.y > 1.0 - 1e-9)
      v[0] = 1.0;  // top, outward normal (0,1)
    else
      v[0] = 0.0;  // vertical sides
  };
  const FemSolution u = eng.solve(assemble_load(mesh, 1, nullptr, f_N));
  for (int i = 0; i < mesh.num_nodes(); ++i)
    CHECK(u.dofs[i] == doctest::Approx(mesh.nodes[i].y).epsilon(1e-10));
  const Vec2 g = u.eval_grad({0.43, 0.57}, 0);
  CHECK(g.x == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(std::abs(g.x) < 1e-10);
  CHECK(g.y == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("planar elasticity reproduces a linear shear exactly") {
  const Domain dom = unit_square_bottom(BoundaryTag::D, BoundaryTag::N);
  const Mesh mesh = triangulate(dom, 0.13);
  MixedEngine eng(mesh, coefficients_from_spec("lame", "1", "1"));
  // u = (y2, 0): strain is pure shear 1/2, stress sigma = [[0,1],[1,0]].
  auto f_N = [](Vec2 p, double* v) {
    v[0] = v[1] = 0.0;
    if (p.y > 1.0 - 1e-9) v[0] = 1.0;        // top: sigma (0,1) = (1,0)
    else if (p.x < 1e-9) v[1] = -1.0;        // left: sigma (-1,0) = (0,-1)
    else if (p.x > 1.0 - 1e-9) v[1] = 1.0;   // right: sigma (1,0) = (0,1)
  };
  const FemSolution u = eng.solve(assemble_load(mesh, 2, nullptr, f_N));
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    CHECK(u.dofs[2 * i] == doctest::Approx(mesh.nodes[i].y).epsilon(1e-9));
    CHECK(std::abs(u.dofs[2 * i + 1]) < 1e-10);
  }
}

TEST_CASE("adjoint solves agree with the transposed pairing") {
  // <g, u_f> = <f~, w_g> exactly in the discrete setting, where u solves the
  // primal problem with load f~ and w the adjoint problem with load g.
  const Mesh mesh = triangulate(zaremba_square(), 0.07);
  MixedEngine eng(mesh, laplace_coefficients());
  auto f = [](Vec2 p, double* v) { v[0] = std::exp(p.x) - p.y; };
  const Eigen::VectorXd lf = assemble_load(mesh, 1, f, nullptr);
  const Eigen::VectorXd g = average_functional(mesh, 1, {0.3, 0.6}, 0.15, 0);
  const FemSolution u = eng.solve(lf);
  const FemSolution w = eng.solve_adjoint(g);
  CHECK(g.dot(u.dofs) == doctest::Approx(lf.dot(w.dofs)).epsilon(1e-12));
}

TEST_CASE("norm helpers") {
  const Mesh mesh = triangulate(unit_square(), 0.1);
  Eigen::VectorXd u(mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i) u[i] = mesh.nodes[i].y;
  CHECK(grad_lt_power(mesh, 1, u, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(grad_lt_power(mesh, 1, u, 3.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(field_lt_power(mesh, 1, u, 2.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("solver refuses domains without a Dirichlet part") {
  const Mesh mesh = triangulate(unit_square(BoundaryTag::N), 0.2);
  CHECK_THROWS(MixedEngine(mesh, laplace_coefficients()));
}
