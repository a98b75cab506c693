#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "greenfem/geometry.hpp"

using namespace greenfem;

TEST_CASE("unit square metrics") {
  Domain sq = unit_square();
  CHECK(sq.area() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sq.perimeter() == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(sq.diameter() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("l-shape metrics") {
  Domain l = l_shape();
  CHECK(l.area() == doctest::Approx(3.0).epsilon(1e-14));
  // Farthest vertex pair is (2,0)-(0,2).
  CHECK(l.diameter() == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
  CHECK(l.contains({0.5, 1.5}));
  CHECK(l.contains({1.5, 0.5}));
  CHECK(!l.contains({1.5, 1.5}));
  CHECK(l.contains({1.0, 1.0}));  // re-entrant corner is on the boundary
}

TEST_CASE("polygon disk area approaches pi R^2") {
  Domain d = regular_polygon_disk({0, 0}, 2.0, 256);
  const double exact = 0.5 * 256 * 4.0 * std::sin(2.0 * M_PI / 256);
  CHECK(d.area() == doctest::Approx(exact).epsilon(1e-13));
  CHECK(d.area() == doctest::Approx(M_PI * 4.0).epsilon(1e-3));
}

TEST_CASE("domain validation rejects bad input") {
  // Clockwise ordering.
  CHECK_THROWS(build_domain({{0, 0}, {0, 1}, {1, 1}, {1, 0}},
                            {{0, 0, BoundaryTag::D}}, 4.0, 0.25));
  // Self-intersecting bowtie.
  CHECK_THROWS(build_domain({{0, 0}, {1, 1}, {1, 0}, {0, 1}},
                            {{0, 0, BoundaryTag::D}}, 4.0, 0.25));
  // Arcs fail to cover the boundary.
  CHECK_THROWS(build_domain({{0, 0}, {1, 0}, {1, 1}, {0, 1}},
                            {{0, 2, BoundaryTag::D}}, 4.0, 0.25));
  // Arcs overlap.
  CHECK_THROWS(build_domain(
      {{0, 0}, {1, 0}, {1, 1}, {0, 1}},
      {{0, 2, BoundaryTag::D}, {1, 0, BoundaryTag::N}}, 4.0, 0.25));
  // r0 exceeding the diameter.
  CHECK_THROWS(build_domain({{0, 0}, {1, 0}, {1, 1}, {0, 1}},
                            {{0, 0, BoundaryTag::D}}, 4.0, 10.0));
  // M below 1.
  CHECK_THROWS(build_domain({{0, 0}, {1, 0}, {1, 1}, {0, 1}},
                            {{0, 0, BoundaryTag::D}}, 0.5, 0.25));
}

TEST_CASE("edge tags and junctions for the mixed square") {
  Domain z = zaremba_square();
  CHECK(z.edge_tag(0) == BoundaryTag::D);
  for (int i = 1; i < 5; ++i) CHECK(z.edge_tag(i) == BoundaryTag::N);
  auto j = z.junction_vertices();
  REQUIRE(j.size() == 2);
  CHECK(j[0] == 0);
  CHECK(j[1] == 1);
  CHECK(z.vertex(1).x == doctest::Approx(0.5));
  CHECK(z.vertex(1).y == doctest::Approx(0.0));
}

TEST_CASE("distance helpers") {
  Domain sq = unit_square_bottom(BoundaryTag::D, BoundaryTag::N);
  CHECK(sq.dist_to_boundary({0.5, 0.3}) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(sq.dist_to_tag({0.5, 0.3}, BoundaryTag::D) ==
        doctest::Approx(0.3).epsilon(1e-14));
  CHECK(sq.dist_to_tag({0.5, 0.3}, BoundaryTag::N) ==
        doctest::Approx(0.5).epsilon(1e-14));
  Vec2 q = sq.closest_boundary_point({0.5, 0.95});
  CHECK(q.x == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(q.y == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("local domain classification") {
  Domain sq = unit_square_bottom(BoundaryTag::D, BoundaryTag::N, 4.0, 0.25);

  SUBCASE("interior point") {
    LocalDomain ld = local_domain(sq, {0.5, 0.5}, 0.2);
    CHECK(!ld.boundary);
    CHECK(ld.center.x == doctest::Approx(0.5));
    CHECK(ld.center.y == doctest::Approx(0.5));
    CHECK(!ld.touches_D);
  }
  SUBCASE("near the top, away from D") {
    LocalDomain ld = local_domain(sq, {0.5, 0.95}, 0.2);
    CHECK(ld.boundary);
    CHECK(ld.center.x == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(ld.center.y == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(!ld.touches_D);
  }
  SUBCASE("near the bottom, reaching D") {
    LocalDomain ld = local_domain(sq, {0.5, 0.1}, 0.2);
    CHECK(ld.boundary);
    CHECK(ld.center.y == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(ld.touches_D);
  }
  SUBCASE("rho range is enforced") {
    CHECK_THROWS(local_domain(sq, {0.5, 0.5}, 0.0));
    CHECK_THROWS(local_domain(sq, {0.5, 0.5}, 1.0));  // 4*r0 = 1
    CHECK_THROWS(local_domain(sq, {2.0, 0.5}, 0.2));  // outside
  }
}

TEST_CASE("corkscrew holds on the mixed square") {
  VerificationReport rep = check_corkscrew(zaremba_square());
  CHECK(rep.pass);
  CHECK(rep.get("worst_ratio") >= 0.25);
}

TEST_CASE("corkscrew is vacuous without junctions") {
  CHECK(check_corkscrew(unit_square()).pass);
  CHECK(check_corkscrew(unit_square(BoundaryTag::N)).pass);
}

TEST_CASE("corkscrew witness may sit in the far sub-segment") {
  // Tiny D piece, epsilon N gap, long D piece: the near piece alone cannot
  // provide a witness at r = r0, the far piece can.
  Domain dom = build_domain(
      {{0, 0}, {0.44, 0}, {0.45, 0}, {0.455, 0}, {1, 0}, {1, 1}, {0, 1}},
      {{0, 1, BoundaryTag::N},
       {1, 2, BoundaryTag::D},
       {2, 3, BoundaryTag::N},
       {3, 4, BoundaryTag::D},
       {4, 0, BoundaryTag::N}},
      4.0, 0.25);
  VerificationReport rep = check_corkscrew(dom);
  CHECK(rep.pass);
}

TEST_CASE("corkscrew fails for an isolated tiny D segment") {
  Domain dom = build_domain(
      {{0, 0}, {0.49, 0}, {0.51, 0}, {1, 0}, {1, 1}, {0, 1}},
      {{0, 1, BoundaryTag::N}, {1, 2, BoundaryTag::D}, {2, 0, BoundaryTag::N}},
      4.0, 0.25);
  VerificationReport rep = check_corkscrew(dom);
  CHECK(!rep.pass);
  CHECK(rep.get("worst_ratio") < 0.25);
}

TEST_CASE("domain file roundtrip") {
  Domain z = zaremba_square();
  const std::string path = "roundtrip_test.dom";
  write_domain(z, path);
  Domain back = read_domain(path);
  REQUIRE(back.num_vertices() == z.num_vertices());
  for (int i = 0; i < z.num_vertices(); ++i) {
    CHECK(back.vertex(i).x == z.vertex(i).x);
    CHECK(back.vertex(i).y == z.vertex(i).y);
    CHECK(back.edge_tag(i) == z.edge_tag(i));
  }
  CHECK(back.M() == z.M());
  CHECK(back.r0() == z.r0());
  // Serialization is deterministic.
  CHECK(format_domain(z) == format_domain(back));
  std::remove(path.c_str());
}

TEST_CASE("domain file errors carry line information") {
  const std::string path = "bad_test.dom";
  {
    std::ofstream out(path);
    out << "v 0 0\nv 1 0\nv 1 1\nbogus 3\n";
  }
  CHECK_THROWS_WITH_AS(read_domain(path), doctest::Contains(":4:"),
                       std::runtime_error);
  std::remove(path.c_str());
}
