#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <random>

#include "greenfem/clip.hpp"
#include "greenfem/geometry.hpp"
#include "greenfem/mesh.hpp"

using namespace greenfem;

namespace {
double quad_sum(const std::vector<QuadPoint>& q,
                const std::function<double(Vec2)>& f) {
  double s = 0.0;
  for (const auto& qp : q) s += qp.w * f(qp.p);
  return s;
}
}  // namespace

TEST_CASE("disk-triangle moments: triangle inside disk") {
  const auto m = disk_triangle_moments({0, 0}, 10.0, {0, 0}, {1, 0}, {0, 1});
  CHECK(m.area == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(m.mx == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
  CHECK(m.my == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
}

TEST_CASE("disk-triangle moments: disk inside triangle") {
  const double r = 0.1;
  const auto m = disk_triangle_moments({0.3, 0.3}, r, {0, 0}, {3, 0}, {0, 3});
  CHECK(m.area == doctest::Approx(M_PI * r * r).epsilon(1e-12));
  CHECK(m.mx == doctest::Approx(0.3 * M_PI * r * r).epsilon(1e-12));
  CHECK(m.my == doctest::Approx(0.3 * M_PI * r * r).epsilon(1e-12));
}

TEST_CASE("disk-triangle moments: half disk") {
  const auto m = disk_triangle_moments({0, 0}, 1.0, {0, -3}, {6, -3}, {0, 3});
  CHECK(m.area == doctest::Approx(M_PI / 2.0).epsilon(1e-12));
  CHECK(m.mx == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.my == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(m.my) < 1e-12);
}

TEST_CASE("disk-triangle moments: quarter disk") {
  const auto m = disk_triangle_moments({0, 0}, 1.0, {0, 0}, {3, 0}, {0, 3});
  CHECK(m.area == doctest::Approx(M_PI / 4.0).epsilon(1e-12));
  CHECK(m.mx == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(m.my == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("disk-triangle moments: additivity under centroid split") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    Vec2 a{U(rng), U(rng)}, b{U(rng), U(rng)}, c{U(rng), U(rng)};
    if (cross(b - a, c - a) < 1e-3) continue;
    const Vec2 g = (1.0 / 3.0) * (a + b + c);
    const Vec2 ctr{0.3 * U(rng), 0.3 * U(rng)};
    const double rho = 0.3 + 0.5 * std::abs(U(rng));
    const auto whole = disk_triangle_moments(ctr, rho, a, b, c);
    const auto m1 = disk_triangle_moments(ctr, rho, a, b, g);
    const auto m2 = disk_triangle_moments(ctr, rho, b, c, g);
    const auto m3 = disk_triangle_moments(ctr, rho, c, a, g);
    CHECK(whole.area ==
          doctest::Approx(m1.area + m2.area + m3.area).epsilon(1e-10));
    CHECK(whole.mx == doctest::Approx(m1.mx + m2.mx + m3.mx).epsilon(5e-10));
    CHECK(whole.my == doctest::Approx(m1.my + m2.my + m3.my).epsilon(5e-10));
  }
}

TEST_CASE("disk-triangle quadrature: matches moments and is linear-exact") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  int used = 0;
  for (int trial = 0; trial < 40; ++trial) {
    Vec2 a{U(rng), U(rng)}, b{U(rng), U(rng)}, c{U(rng), U(rng)};
    if (cross(b - a, c - a) < 1e-3) continue;
    const Vec2 ctr{0.4 * U(rng), 0.4 * U(rng)};
    const double rho = 0.2 + 0.6 * std::abs(U(rng));
    const auto mom = disk_triangle_moments(ctr, rho, a, b, c);
    std::vector<QuadPoint> q;
    disk_triangle_quadrature(ctr, rho, a, b, c, q);
    const double area = quad_sum(q, [](Vec2) { return 1.0; });
    const double mx = quad_sum(q, [](Vec2 p) { return p.x; });
    const double my = quad_sum(q, [](Vec2 p) { return p.y; });
    CHECK(area == doctest::Approx(mom.area).epsilon(1e-10));
    if (mom.area > 1e-6) {
      CHECK(mx == doctest::Approx(mom.mx).epsilon(1e-8));
      CHECK(my == doctest::Approx(mom.my).epsilon(1e-8));
      ++used;
    }
  }
  CHECK(used > 10);
}

TEST_CASE("triangulate: unit square") {
  const Domain dom = unit_square();
  const Mesh m = triangulate(dom, 0.1);
  const auto rep = check_mesh(m, dom);
  if (!rep.pass) std::printf("%s\n", format_report(rep).c_str());
  CHECK(rep.pass);
  CHECK(total_area(m) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(max_edge_length(m) <= 0.1 * (1.0 + 1e-9));
  CHECK(min_angle_degrees(m) >= 20.0);
  CHECK(m.num_nodes() > 100);
  for (const auto& be : m.bedges) CHECK(be.tag == BoundaryTag::D);
}

TEST_CASE("triangulate: polygon disk area is exact") {
  const Domain dom = regular_polygon_disk({0, 0}, 1.0, 64);
  const Mesh m = triangulate(dom, 0.1);
  const auto rep = check_mesh(m, dom);
  if (!rep.pass) std::printf("%s\n", format_report(rep).c_str());
  CHECK(rep.pass);
  CHECK(total_area(m) == doctest::Approx(dom.area()).epsilon(1e-12));
  CHECK(min_angle_degrees(m) >= 20.0);
}

TEST_CASE("triangulate: L-shape and mixed-boundary square") {
  const Domain lsh = l_shape();
  const Mesh ml = triangulate(lsh, 0.15);
  auto rep = check_mesh(ml, lsh);
  if (!rep.pass) std::printf("%s\n", format_report(rep).c_str());
  CHECK(rep.pass);
  CHECK(total_area(ml) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(min_angle_degrees(ml) >= 20.0);

  const Domain za = zaremba_square();
  const Mesh mz = triangulate(za, 0.1);
  rep = check_mesh(mz, za);
  if (!rep.pass) std::printf("%s\n", format_report(rep).c_str());
  CHECK(rep.pass);
  const auto on_d = nodes_on_tag(mz, BoundaryTag::D);
  const auto on_n = nodes_on_tag(mz, BoundaryTag::N);
  int nd = 0, nn = 0, both = 0;
  for (int i = 0; i < mz.num_nodes(); ++i) {
    nd += on_d[i];
    nn += on_n[i];
    if (on_d[i] && on_n[i]) {
      ++both;
      const bool at_junction = dist(mz.nodes[i], Vec2{0.5, 0.0}) < 1e-12 ||
                               dist(mz.nodes[i], Vec2{0.0, 0.0}) < 1e-12;
      CHECK(at_junction);
    }
  }
  CHECK(nd > 2);
  CHECK(nn > 2);
  CHECK(both == 2);  // the two junction vertices
}

TEST_CASE("integrate: degree-two volume rule and degree-three edge rule") {
  const Mesh m = triangulate(unit_square(), 0.13);
  CHECK(integrate(m, [](Vec2 p, int) { return p.x * p.x; }) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(integrate(m, [](Vec2 p, int) { return p.x * p.y; }) ==
        doctest::Approx(0.25).epsilon(1e-12));
  CHECK(boundary_integrate(m, [](Vec2, const Mesh::BEdge&) { return 1.0; }) ==
        doctest::Approx(4.0).epsilon(1e-12));
  CHECK(boundary_integrate(
            m, [](Vec2 p, const Mesh::BEdge&) { return p.x * p.x; }) ==
        doctest::Approx(5.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("region quadrature: interior disk of the unit square") {
  const Mesh m = triangulate(unit_square(), 0.09);
  const Vec2 c{0.5, 0.5};
  const double rho = 0.3;
  const auto q = region_quadrature(m, c, rho);
  const double area = quad_sum(q, [](Vec2) { return 1.0; });
  CHECK(area == doctest::Approx(M_PI * rho * rho).epsilon(1e-12));
  CHECK(region_area(m, c, rho) == doctest::Approx(M_PI * rho * rho).epsilon(1e-12));
  CHECK(quad_sum(q, [](Vec2 p) { return 2.0 * p.x - p.y; }) ==
        doctest::Approx((2.0 * c.x - c.y) * M_PI * rho * rho).epsilon(1e-11));

  const auto hm = hat_moments(m, c, rho);
  double tot = 0.0, lin = 0.0;
  for (int i = 0; i < m.num_nodes(); ++i) {
    tot += hm[i];
    lin += hm[i] * (2.0 * m.nodes[i].x - m.nodes[i].y);
  }
  CHECK(tot == doctest::Approx(M_PI * rho * rho).epsilon(1e-12));
  CHECK(lin == doctest::Approx((2.0 * c.x - c.y) * M_PI * rho * rho).epsilon(1e-11));
}

TEST_CASE("region quadrature: boundary-clipped disk") {
  const Mesh m = triangulate(unit_square(), 0.09);
  {
    // Generic center on the bottom edge: exact clipping.
    const Vec2 c{0.47, 0.0};
    const double rho = 0.25;
    CHECK(region_area(m, c, rho) ==
          doctest::Approx(0.5 * M_PI * rho * rho).epsilon(1e-12));
    const auto bq = boundary_region_quadrature(m, c, rho, std::nullopt);
    CHECK(quad_sum(bq, [](Vec2) { return 1.0; }) ==
          doctest::Approx(2.0 * rho).epsilon(1e-12));
    CHECK(quad_sum(bq, [](Vec2 p) { return p.x; }) ==
          doctest::Approx(2.0 * rho * c.x).epsilon(1e-11));
  }
  {
    // Mesh nodes landing exactly on the circle: the degenerate-event
    // fallback keeps the result accurate to ~1e-6 relative.
    const Vec2 c{0.5, 0.0};
    const double rho = 0.25;
    CHECK(region_area(m, c, rho) ==
          doctest::Approx(0.5 * M_PI * rho * rho).epsilon(2e-6));
  }
}

TEST_CASE("boundary region quadrature honors tags at the junction") {
  const Domain za = zaremba_square();
  const Mesh m = triangulate(za, 0.1);
  const Vec2 c{0.5, 0.0};
  const double rho = 0.2;
  const auto qd = boundary_region_quadrature(m, c, rho, BoundaryTag::D);
  const auto qn = boundary_region_quadrature(m, c, rho, BoundaryTag::N);
  CHECK(quad_sum(qd, [](Vec2) { return 1.0; }) == doctest::Approx(rho).epsilon(1e-12));
  CHECK(quad_sum(qn, [](Vec2) { return 1.0; }) == doctest::Approx(rho).epsilon(1e-12));
  for (const auto& qp : qd) CHECK(qp.p.x <= 0.5 + 1e-12);
  for (const auto& qp : qn) CHECK(qp.p.x >= 0.5 - 1e-12);
}

TEST_CASE("d-adapted average: plain average away from the Dirichlet part") {
  const Domain za = zaremba_square();
  const Mesh m = triangulate(za, 0.07);
  const LocalDomain far = local_domain(za, {0.5, 0.55}, 0.2);
  CHECK_FALSE(far.touches_D);
  CHECK(d_adapted_average(m, far, [](Vec2 p, int) { return p.x; }) ==
        doctest::Approx(0.5).epsilon(1e-10));
  const LocalDomain near_d = local_domain(za, {0.3, 0.05}, 0.2);
  CHECK(near_d.touches_D);
  CHECK(d_adapted_average(m, near_d, [](Vec2 p, int) { return p.x; }) == 0.0);
}

TEST_CASE("refine_toward: dyadic size bands around the target point") {
  const Domain dom = unit_square();  // r0 = 0.25
  Mesh m = triangulate(dom, 0.1);
  const Vec2 x{0.25, 0.25};
  refine_toward(m, dom, x, 2);
  const auto rep = check_mesh(m, dom);
  if (!rep.pass) std::printf("%s\n", format_report(rep).c_str());
  CHECK(rep.pass);
  for (int t = 0; t < m.num_tris(); ++t) {
    double d = 1e300, longest = 0.0;
    for (int e = 0; e < 3; ++e) {
      const Vec2 a = m.nodes[m.tris[t][e]], b = m.nodes[m.tris[t][(e + 1) % 3]];
      d = std::min(d, segment_distance(x, a, b));
      longest = std::max(longest, dist(a, b));
    }
    if (d <= 0.25 / 4.0) {
      CHECK(longest <= 0.1 / 4.0 * (1.0 + 1e-9));
    } else if (d <= 0.25 / 2.0) {
      CHECK(longest <= 0.1 / 2.0 * (1.0 + 1e-9));
    }
  }
  CHECK(min_angle_degrees(m) >= 10.0);
}

TEST_CASE("triangulate is deterministic and the file format round-trips") {
  const Domain dom = zaremba_square();
  const Mesh m1 = triangulate(dom, 0.11);
  const Mesh m2 = triangulate(dom, 0.11);
  const std::string s1 = format_mesh(m1), s2 = format_mesh(m2);
  CHECK(s1 == s2);
  const std::string path = "roundtrip_mesh.txt";
  write_mesh(m1, path);
  const Mesh m3 = read_mesh(path);
  CHECK(m3.num_nodes() == m1.num_nodes());
  CHECK(m3.num_tris() == m1.num_tris());
  CHECK(format_mesh(m3) == s1);
  std::remove(path.c_str());
}

TEST_CASE("locator finds containing triangles") {
  const Mesh m = triangulate(l_shape(), 0.12);
  const Locator loc(m);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(0.0, 2.0);
  int tested = 0;
  const Domain dom = l_shape();
  for (int k = 0; k < 200; ++k) {
    const Vec2 p{U(rng), U(rng)};
    if (!dom.contains(p, -1e-9) || dom.dist_to_boundary(p) < 1e-6) continue;
    std::array<double, 3> l{};
    const int t = loc.locate(p, &l);
    REQUIRE(t >= 0);
    const auto& v = m.tris[t];
    const Vec2 rec = l[0] * m.nodes[v[0]] + l[1] * m.nodes[v[1]] + l[2] * m.nodes[v[2]];
    CHECK(dist(rec, p) < 1e-9);
    ++tested;
  }
  CHECK(tested > 50);
  CHECK_THROWS(loc.locate({5.0, 5.0}));
  // Boundary points resolve too.
  std::array<double, 3> l{};
  (void)loc.locate({0.0, 0.0}, &l);
  (void)loc.locate({2.0, 1.0}, &l);
}
