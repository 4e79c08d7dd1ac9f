#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oslc/bench.hpp"
#include "oslc/conservative.hpp"
#include "oslc/metrics.hpp"
#include "oslc/rng.hpp"

using namespace oslc;

namespace {

ProblemFields make_1d(std::function<Vec(double, const Vec&)> b, double sigma, double T, int N) {
  ProblemFields pf;
  pf.dim = 1;
  pf.drift.eval = std::move(b);
  pf.drift.c0 = 2.0;
  pf.drift.time_dependent = false;
  pf.diffusion.column = [sigma](double, const Vec&, int) { return Vec(sigma); };
  pf.diffusion.r = 1;
  pf.diffusion.c2 = std::fabs(sigma);
  pf.diffusion.time_dependent = false;
  pf.mollifier = MollifierSpec::defaults(1);
  pf.grid = TimeGrid(T, N);
  return pf;
}

}  // namespace

TEST_CASE("projection of a uniform simplex mass splits to the vertices evenly") {
  Mesh tri(2, {{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
  DiscreteMeasure f = project_initial(tri, SourceMeasure::per_simplex({1.0}));
  for (int i = 0; i < 3; ++i) CHECK(f.w[i] == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(f.mass() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("projection preserves total mass for every source kind") {
  Mesh mesh = build_box_mesh({{-2, -2}, {2, 2}}, 0.02);
  SUBCASE("box indicator") {
    DiscreteMeasure f =
        project_initial(mesh, SourceMeasure::box_indicator({{-1.5, -0.25}, {-0.1, 0.25}}, 1.0));
    CHECK(f.mass() == doctest::Approx(1.4 * 0.5).epsilon(1e-12));
  }
  SUBCASE("density rule") {
    auto rho = [](const Vec& x) { return std::exp(-x.norm2()); };
    DiscreteMeasure f =
        project_initial(mesh, SourceMeasure::density_rule(rho, {{-1, -1}, {1, 1}}, 6));
    // Oracle: fine midpoint integral of the density over the support box.
    double exact = 0.0;
    const int n = 600;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        exact += rho(Vec(-1 + (i + 0.5) * 2.0 / n, -1 + (j + 0.5) * 2.0 / n)) * (2.0 / n) *
                 (2.0 / n);
    CHECK(f.mass() == doctest::Approx(exact).epsilon(1e-3));
  }
  SUBCASE("point cloud") {
    DiscreteMeasure f = project_initial(
        mesh, SourceMeasure::point_cloud({{Vec(0.1, 0.2), 0.3}, {Vec(-0.7, 0.4), 0.9}}));
    CHECK(f.mass() == doctest::Approx(1.2).epsilon(1e-13));
  }
}

TEST_CASE("indicator projection on a coarse interval mesh gives the known weights") {
  Mesh mesh = build_interval_mesh(-5.0, 5.0, 20);  // dx = 0.5, vertices on half-integers
  DiscreteMeasure f = project_initial(mesh, SourceMeasure::box_indicator({{-1.0}, {1.0}}, 1.0));
  CHECK(f.mass() == doctest::Approx(2.0).epsilon(1e-13));
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    const double x = mesh.vertex(i).x;
    if (x > -1.0 + 0.25 && x < 1.0 - 0.25)
      CHECK(f.w[i] == doctest::Approx(0.5).epsilon(1e-12));
    else if (std::fabs(std::fabs(x) - 1.0) < 0.25)
      CHECK(f.w[i] == doctest::Approx(0.25).epsilon(1e-12));
    else if (std::fabs(x) > 1.25)
      CHECK(f.w[i] == 0.0);
  }
}

TEST_CASE("support outside the hull is a structured error") {
  Mesh mesh = build_interval_mesh(0.0, 1.0, 10);
  CHECK_THROWS_AS(
      project_initial(mesh, SourceMeasure::box_indicator({{-1.0}, {0.5}}, 1.0)),
      SupportEscapedError);
  CHECK_THROWS_AS(
      project_initial(mesh, SourceMeasure::point_cloud({{Vec(2.0), 1.0}})),
      SupportEscapedError);
}

TEST_CASE("forward step on aligned endpoints") {
  Mesh mesh = build_interval_mesh(-2.0, 2.0, 40);  // dx = 0.1
  SUBCASE("zero coefficients keep the measure fixed") {
    ProblemFields pf = make_1d([](double, const Vec&) { return Vec(0.0); }, 0.0, 1.0, 10);
    CoefficientTable table(pf, mesh);
    DiscreteMeasure f(mesh);
    f.w[13] = 0.4;
    f.w[27] = 0.6;
    DiscreteMeasure g = step_forward(mesh, table, 0, f);
    for (int i = 0; i < mesh.vertex_count(); ++i) CHECK(g.w[i] == doctest::Approx(f.w[i]));
  }
  SUBCASE("half-cell drift splits a point mass") {
    ProblemFields pf = make_1d([](double, const Vec&) { return Vec(-0.5); }, 0.0, 1.0, 10);
    CoefficientTable table(pf, mesh);
    DiscreteMeasure f(mesh);
    f.w[20] = 1.0;
    DiscreteMeasure g = step_forward(mesh, table, 0, f);
    CHECK(g.w[20] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g.w[21] == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("mass conservation and nonnegativity along a full path") {
  ProblemFields pf = make_1d(
      [](double, const Vec& x) { return Vec(x.x < 0.3 ? -0.9 : -0.2); }, 0.15, 1.0, 20);
  Mesh mesh = build_interval_mesh(-4.0, 4.0, 320);
  CoefficientTable table(pf, mesh);
  MeasurePath path = solve_forward(mesh, table, pf.grid,
                                   SourceMeasure::box_indicator({{-1.0}, {1.0}}, 1.0),
                                   EscapePolicy::ClampToHull);
  const double m0 = path.steps[0].mass();
  for (const auto& f : path.steps) {
    CHECK(std::fabs(f.mass() - m0) <= 1e-12);
    for (double w : f.w) CHECK(w >= 0.0);
  }
}

TEST_CASE("time interpolation of the measure path blends the bracketing steps") {
  ProblemFields pf = make_1d([](double, const Vec&) { return Vec(-0.5); }, 0.0, 1.0, 10);
  Mesh mesh = build_interval_mesh(-2.0, 2.0, 40);
  CoefficientTable table(pf, mesh);
  MeasurePath path = solve_forward(mesh, table, pf.grid,
                                   SourceMeasure::box_indicator({{-1.0}, {1.0}}, 1.0),
                                   EscapePolicy::ClampToHull);
  DiscreteMeasure mid = path.at_time(0.15);
  for (int i = 0; i < mesh.vertex_count(); ++i)
    CHECK(mid.w[i] == doctest::Approx(0.5 * (path.steps[1].w[i] + path.steps[2].w[i]))
                          .epsilon(1e-12));
  CHECK(path.at_time(0.0).w == path.steps[0].w);
  const DiscreteMeasure last = path.at_time(1.0);
  for (int i = 0; i < mesh.vertex_count(); ++i)
    CHECK(std::fabs(last.w[i] - path.steps[10].w[i]) <= 1e-15);
}

TEST_CASE("duality gap is round-off for matched forward and backward runs") {
  ProblemFields pf = make_1d(
      [](double, const Vec& x) { return Vec(x.x < 0 ? -1.0 : -0.5); }, 0.1, 1.0, 16);
  Mesh mesh = build_interval_mesh(-4.0, 4.0, 200);
  CoefficientTable table(pf, mesh);
  const SourceMeasure f0 = SourceMeasure::box_indicator({{-1.0}, {1.0}}, 1.0);

  SUBCASE("constant test function reduces to mass conservation") {
    GridFunction g(mesh, 1.0);
    CHECK(duality_gap(mesh, table, pf.grid, f0, g, 16, EscapePolicy::ClampToHull) <= 1e-12);
  }
  SUBCASE("coordinate test function") {
    GridFunction g(mesh, 0.0);
    for (int i = 0; i < mesh.vertex_count(); ++i) g(i) = mesh.vertex(i).x;
    const double gap = duality_gap(mesh, table, pf.grid, f0, g, 16, EscapePolicy::ClampToHull);
    CHECK(gap <= 1e-10 * 4.0);
  }
  SUBCASE("20 random bounded test functions at several steps") {
    CounterRng rng(7);
    for (int k : {4, 16}) {
      std::vector<GridFunction> gs;
      for (int q = 0; q < 20; ++q) {
        GridFunction g(mesh, 0.0);
        CounterRng gr = rng.split(100 * k + q);
        for (auto& v : g.values) v = 2.0 * gr.next_double() - 1.0;
        gs.push_back(std::move(g));
      }
      const auto gaps =
          duality_gaps(mesh, table, pf.grid, f0, gs, k, EscapePolicy::ClampToHull);
      for (double gp : gaps) CHECK(gp <= 1e-10);
    }
  }
}

TEST_CASE("second moments along the path stay within the a-priori envelope") {
  ProblemFields pf = make_1d(
      [](double, const Vec& x) { return Vec(-0.5 * std::tanh(x.x)); }, 0.2, 1.0, 20);
  Mesh mesh = build_interval_mesh(-4.0, 4.0, 160);
  CoefficientTable table(pf, mesh);
  MeasurePath path = solve_forward(mesh, table, pf.grid,
                                   SourceMeasure::box_indicator({{-1.0}, {1.0}}, 0.5),
                                   EscapePolicy::ClampToHull);
  const double m0 = second_moment(path.steps[0]);
  // Envelope with C built from the declared bounds: one-step displacement is
  // at most h*C0 + sqrt(rh)*C2 per unit mass.
  const double C = 2.0 * pf.drift.c0 + pf.drift.c0 * pf.drift.c0 +
                   pf.diffusion.r * pf.diffusion.c2 * pf.diffusion.c2;
  const double dx2_over_h = mesh.dx() * mesh.dx() / pf.h();
  const double T = pf.grid.T;
  const double mass = path.steps[0].mass();
  const double bound = std::exp(C * T) * (m0 + mass * T * (C + dx2_over_h));
  for (int k = 0; k <= 20; ++k) CHECK(second_moment(path.steps[k]) <= bound);
}

TEST_CASE("path increments satisfy the finite-speed transport envelope") {
  // One step moves each unit of mass at most h*C0 + sqrt(rh)*C2 and then
  // redistributes it within one simplex, so W1 between any two steps is
  // bounded by the elapsed-step count times that displacement budget.
  ProblemFields pf = make_1d(
      [](double, const Vec& x) { return Vec(-0.6 * std::sin(x.x)); }, 0.25, 1.0, 25);
  Mesh mesh = build_interval_mesh(-4.0, 4.0, 320);
  CoefficientTable table(pf, mesh);
  MeasurePath path = solve_forward(mesh, table, pf.grid,
                                   SourceMeasure::box_indicator({{-1.0}, {1.0}}, 0.5),
                                   EscapePolicy::ClampToHull);
  const double h = pf.h();
  const double mass = path.steps[0].mass();
  const double per_step =
      (h * pf.drift.c0 + std::sqrt(pf.diffusion.r * h) * pf.diffusion.c2 + mesh.dx()) * mass;
  for (int k = 0; k <= 25; ++k)
    for (int k2 = k + 1; k2 <= 25; ++k2) {
      const double w = wasserstein1_1d(path.steps[k], path.steps[k2]);
      CHECK(w <= per_step * (k2 - k) + 1e-12);
      CHECK(w > 0.0);  // the drift keeps the profile moving
    }
}

TEST_CASE("projection of the interval indicator is W1-close to the density") {
  BuiltinProblem p = builtin_problem("test1");
  for (int n : {100, 200, 500}) {
    Mesh mesh = build_interval_mesh(-5.0, 5.0, n);
    DiscreteMeasure f0 = project_initial(mesh, p.initial);
    const Cdf1d exact = Cdf1d::from_step_density({-1.0, 1.0}, {1.0});
    CHECK(wasserstein1_1d(f0, exact) <= mesh.dx() * f0.mass());
  }
}

TEST_CASE("negative round-off clamps are recorded in the ledger") {
  ProblemFields pf = make_1d([](double, const Vec&) { return Vec(-0.37); }, 0.21, 1.0, 12);
  Mesh mesh = build_interval_mesh(-4.0, 4.0, 170);
  CoefficientTable table(pf, mesh);
  ClampLedger ledger;
  MeasurePath path = solve_forward(mesh, table, pf.grid,
                                   SourceMeasure::box_indicator({{-1.0}, {1.0}}, 1.0),
                                   EscapePolicy::ClampToHull, &ledger);
  CHECK(ledger.clamped_negative >= 0.0);
  CHECK(ledger.clamped_negative <= 1e-12);
  CHECK(ledger.clamped_rows == 0);  // nothing reaches the hull here
}
