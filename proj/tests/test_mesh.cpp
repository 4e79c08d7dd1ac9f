#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oslc/mesh.hpp"
#include "oslc/rng.hpp"

using namespace oslc;

namespace {

Mesh reference_triangle() {
  return Mesh(2, {{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
}

Vec random_point_in(const Box& b, int dim, CounterRng& rng) {
  Vec p;
  p.x = b.lo.x + (b.hi.x - b.lo.x) * rng.next_double();
  if (dim == 2) p.y = b.lo.y + (b.hi.y - b.lo.y) * rng.next_double();
  return p;
}

}  // namespace

TEST_CASE("barycentric coordinates on the reference triangle") {
  Mesh m = reference_triangle();
  auto at_vertex = m.barycentric_coords(0, {0, 0});
  CHECK(at_vertex[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(at_vertex[1] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(at_vertex[2] == doctest::Approx(0.0).epsilon(1e-14));

  auto centroid = m.barycentric_coords(0, {1.0 / 3, 1.0 / 3});
  for (int i = 0; i < 3; ++i) CHECK(centroid[i] == doctest::Approx(1.0 / 3).epsilon(1e-13));

  auto mid = m.barycentric_coords(0, {0.5, 0.25});
  CHECK(mid[0] == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(mid[1] == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(mid[2] == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("degenerate simplices are rejected") {
  CHECK_THROWS_AS(Mesh(2, {{0, 0}, {1, 0}, {2, 0}}, {{{0, 1, 2}}}), MeshError);
  CHECK_THROWS_AS(Mesh(1, {{0}, {0}}, {{{0, 1, -1}}}), MeshError);
}

TEST_CASE("locate: determinism, outside hull, and lowest-id tie-break") {
  Mesh m = build_box_mesh({{0, 0}, {1, 1}}, 0.1);
  const Vec vertex0 = m.vertex(0);
  auto first = m.locate(vertex0);
  REQUIRE(first.has_value());
  for (int rep = 0; rep < 10; ++rep) CHECK(m.locate(vertex0) == first);

  CHECK_FALSE(m.locate({2.5, 0.5}).has_value());
  CHECK_FALSE(m.locate({0.5, -0.1}).has_value());

  // A point on a shared face lies in several simplices; the lowest id wins.
  Mesh tiny(2, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{{0, 1, 2}}, {{0, 2, 3}}});
  auto s = tiny.locate({0.5, 0.5});  // on the shared diagonal
  REQUIRE(s.has_value());
  CHECK(*s == 0);
}

TEST_CASE("interpolation reproduces affine data and the basis functions") {
  Mesh m = build_box_mesh({{0, 0}, {1, 1}}, 0.02);
  GridFunction f(m, 0.0);
  for (int i = 0; i < m.vertex_count(); ++i) f(i) = 2.0 * m.vertex(i).x + 3.0;
  CounterRng rng(7);
  for (int q = 0; q < 100; ++q) {
    Vec p = random_point_in({{0.01, 0.01}, {0.99, 0.99}}, 2, rng);
    CHECK(interpolate(f, p) == doctest::Approx(2.0 * p.x + 3.0).epsilon(1e-12));
  }

  // Indicator of one vertex interpolates to its barycentric weight.
  Mesh tri = reference_triangle();
  GridFunction basis(tri, 0.0);
  basis(1) = 1.0;
  CHECK(interpolate(basis, {0.5, 0.25}) == doctest::Approx(0.5).epsilon(1e-13));

  CHECK_THROWS_AS(interpolate(f, Vec(3.0, 3.0)), OutsideHullError);
}

TEST_CASE("quadratic interpolation error is second order in the mesh size") {
  Mesh m = build_interval_mesh(0.0, 1.0, 10);  // dx = 0.1
  GridFunction f(m, 0.0);
  for (int i = 0; i < m.vertex_count(); ++i) f(i) = m.vertex(i).x * m.vertex(i).x;
  double worst = 0.0;
  for (int q = 0; q <= 10000; ++q) {
    const double x = q / 10000.0;
    worst = std::max(worst, std::fabs(interpolate(f, Vec(x)) - x * x));
  }
  CHECK(worst <= 0.0025 + 1e-12);  // dx^2 / 4
  CHECK(worst > 0.002);            // the bound is attained at cell midpoints
}

TEST_CASE("interval mesh builder") {
  Mesh m = build_interval_mesh(0.0, 1.0, 4);
  REQUIRE(m.vertex_count() == 5);
  REQUIRE(m.simplex_count() == 4);
  for (int i = 0; i < 5; ++i) CHECK(m.vertex(i).x == doctest::Approx(0.25 * i));
  CHECK_THROWS_AS(build_interval_mesh(0.0, 1.0, 0), MeshError);
}

TEST_CASE("box mesh builder respects the area bound and covers the box") {
  Mesh m = build_box_mesh({{0, 0}, {1, 1}}, 0.5);
  double total = 0.0;
  for (int s = 0; s < m.simplex_count(); ++s) {
    const auto& sx = m.simplex(s);
    const Vec a = m.vertex(sx[0]), b = m.vertex(sx[1]), c = m.vertex(sx[2]);
    const double area = 0.5 * std::fabs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
    CHECK(area <= 0.5 + 1e-12);
    CHECK(area > 0.0);
    total += area;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CounterRng rng(3);
  for (int q = 0; q < 200; ++q)
    CHECK(m.locate(random_point_in({{0, 0}, {1, 1}}, 2, rng)).has_value());
  CHECK_THROWS_AS(build_box_mesh({{0, 0}, {1, 1}}, 0.0), MeshError);
}

TEST_CASE("diameter-targeted box mesh stays within the requested resolution") {
  Mesh m = build_box_mesh_diameter({{-1, -1}, {1, 1}}, 0.25);
  CHECK(m.dx() <= 0.25 + 1e-12);
}

TEST_CASE("partition of unity at random interior points") {
  Mesh m = build_box_mesh({{-1, -1}, {1, 1}}, 0.01);
  CounterRng rng(11);
  for (int q = 0; q < 10000; ++q) {
    Vec p = random_point_in({{-0.99, -0.99}, {0.99, 0.99}}, 2, rng);
    auto s = m.locate(p);
    REQUIRE(s.has_value());
    auto bc = m.barycentric_coords(*s, p);
    CHECK(std::fabs(bc[0] + bc[1] + bc[2] - 1.0) <= 1e-12);
    for (int i = 0; i < 3; ++i) {
      CHECK(bc[i] >= -m.locate_tolerance());
      CHECK(bc[i] <= 1.0 + m.locate_tolerance());
    }
  }
}

TEST_CASE("affine exactness at random interior points") {
  Mesh m = build_box_mesh({{-2, -2}, {2, 2}}, 0.05);
  GridFunction f(m, 0.0);
  for (int i = 0; i < m.vertex_count(); ++i)
    f(i) = 1.5 * m.vertex(i).x - 0.7 * m.vertex(i).y + 0.3;
  CounterRng rng(13);
  for (int q = 0; q < 1000; ++q) {
    Vec p = random_point_in({{-1.9, -1.9}, {1.9, 1.9}}, 2, rng);
    const double exact = 1.5 * p.x - 0.7 * p.y + 0.3;
    CHECK(std::fabs(interpolate(f, p) - exact) <= 1e-10 * (1.0 + std::fabs(exact)));
  }
}

TEST_CASE("interpolation of a Lipschitz function stays within L*dx") {
  const double L = 2.0;
  auto phi = [](const Vec& p) { return std::fabs(std::sin(p.x)) + std::fabs(p.y); };
  Mesh m = build_box_mesh({{-1, -1}, {1, 1}}, 0.02);
  GridFunction f(m, 0.0);
  for (int i = 0; i < m.vertex_count(); ++i) f(i) = phi(m.vertex(i));
  CounterRng rng(17);
  for (int q = 0; q < 2000; ++q) {
    Vec p = random_point_in({{-0.99, -0.99}, {0.99, 0.99}}, 2, rng);
    CHECK(std::fabs(interpolate(f, p) - phi(p)) <= L * m.dx() + 1e-10);
  }
}

TEST_CASE("locate plus barycentric coordinates reconstruct the query point") {
  Mesh m = build_box_mesh({{-1, -1}, {1, 1}}, 0.03);
  CounterRng rng(19);
  for (int q = 0; q < 2000; ++q) {
    Vec p = random_point_in({{-0.99, -0.99}, {0.99, 0.99}}, 2, rng);
    auto s = m.locate(p);
    REQUIRE(s.has_value());
    auto bc = m.barycentric_coords(*s, p);
    const auto& sx = m.simplex(*s);
    Vec rec = bc[0] * m.vertex(sx[0]) + bc[1] * m.vertex(sx[1]) + bc[2] * m.vertex(sx[2]);
    CHECK((rec - p).norm() <= 1e-10 * (1.0 + p.norm()));
  }
}
