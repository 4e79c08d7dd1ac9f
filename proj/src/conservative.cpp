#include "oslc/conservative.hpp"

#include <algorithm>
#include <cmath>

namespace oslc {

namespace {

double kahan_sum(const std::vector<double>& v) {
  double s = 0.0, c = 0.0;
  for (double x : v) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

// Area of the clip of triangle (a,b,c) against an axis-aligned box
// (Sutherland-Hodgman against the four half-planes).
double triangle_box_area(const Vec& a, const Vec& b, const Vec& c, const Box& box) {
  std::vector<Vec> poly = {a, b, c};
  auto clip = [&](auto inside, auto intersect) {
    std::vector<Vec> out;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
      const Vec& p = poly[i];
      const Vec& q = poly[(i + 1) % n];
      const bool pin = inside(p), qin = inside(q);
      if (pin) out.push_back(p);
      if (pin != qin) out.push_back(intersect(p, q));
    }
    poly = std::move(out);
  };
  auto cut_x = [&](double v, bool keep_ge) {
    clip([&](const Vec& p) { return keep_ge ? p.x >= v : p.x <= v; },
         [&](const Vec& p, const Vec& q) {
           const double t = (v - p.x) / (q.x - p.x);
           return Vec(v, p.y + t * (q.y - p.y));
         });
  };
  auto cut_y = [&](double v, bool keep_ge) {
    clip([&](const Vec& p) { return keep_ge ? p.y >= v : p.y <= v; },
         [&](const Vec& p, const Vec& q) {
           const double t = (v - p.y) / (q.y - p.y);
           return Vec(p.x + t * (q.x - p.x), v);
         });
  };
  cut_x(box.lo.x, true);
  cut_x(box.hi.x, false);
  cut_y(box.lo.y, true);
  cut_y(box.hi.y, false);
  if (poly.size() < 3) return 0.0;
  double area2 = 0.0;
  for (size_t i = 0; i < poly.size(); ++i) {
    const Vec& p = poly[i];
    const Vec& q = poly[(i + 1) % poly.size()];
    area2 += p.x * q.y - q.x * p.y;
  }
  return 0.5 * std::fabs(area2);
}

double simplex_volume(const Mesh& mesh, int s) {
  const auto& sp = mesh.simplex(s);
  const Vec& a = mesh.vertex(sp[0]);
  const Vec& b = mesh.vertex(sp[1]);
  if (mesh.dim() == 1) return std::fabs(b.x - a.x);
  const Vec& c = mesh.vertex(sp[2]);
  return 0.5 * std::fabs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

// Midpoint quadrature of `f` over simplex s, refined `n` times per axis.
double simplex_density_integral(const Mesh& mesh, int s, const std::function<double(const Vec&)>& f,
                                int n) {
  const auto& sp = mesh.simplex(s);
  const Vec& a = mesh.vertex(sp[0]);
  const Vec& b = mesh.vertex(sp[1]);
  if (mesh.dim() == 1) {
    const double len = b.x - a.x;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += f(Vec(a.x + (i + 0.5) * len / n));
    return acc * std::fabs(len) / n;
  }
  const Vec& c = mesh.vertex(sp[2]);
  const double sub_area = simplex_volume(mesh, s) / (n * n);
  auto point = [&](double l2, double l3) { return a + l2 * (b - a) + l3 * (c - a); };
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n - i; ++j) {
      // Upright sub-triangle centroid.
      acc += f(point((i + 1.0 / 3.0) / n, (j + 1.0 / 3.0) / n));
      // Inverted one, when present.
      if (j < n - i - 1) acc += f(point((i + 2.0 / 3.0) / n, (j + 2.0 / 3.0) / n));
    }
  return acc * sub_area;
}

bool simplex_overlaps_box(const Mesh& mesh, int s, const Box& box) {
  const auto& sp = mesh.simplex(s);
  double lx = mesh.vertex(sp[0]).x, hx = lx, ly = mesh.vertex(sp[0]).y, hy = ly;
  for (int m = 1; m <= mesh.dim(); ++m) {
    lx = std::min(lx, mesh.vertex(sp[m]).x);
    hx = std::max(hx, mesh.vertex(sp[m]).x);
    ly = std::min(ly, mesh.vertex(sp[m]).y);
    hy = std::max(hy, mesh.vertex(sp[m]).y);
  }
  if (hx < box.lo.x || lx > box.hi.x) return false;
  if (mesh.dim() == 2 && (hy < box.lo.y || ly > box.hi.y)) return false;
  return true;
}

}  // namespace

double DiscreteMeasure::mass() const { return kahan_sum(w); }

SourceMeasure SourceMeasure::box_indicator(const Box& b, double height) {
  SourceMeasure s;
  s.kind = Kind::BoxIndicator;
  s.support = b;
  s.height = height;
  return s;
}

SourceMeasure SourceMeasure::density_rule(std::function<double(const Vec&)> f, const Box& support,
                                          int refine) {
  SourceMeasure s;
  s.kind = Kind::Density;
  s.density = std::move(f);
  s.support = support;
  s.refine = refine;
  return s;
}

SourceMeasure SourceMeasure::point_cloud(std::vector<std::pair<Vec, double>> pts) {
  SourceMeasure s;
  s.kind = Kind::PointCloud;
  s.points = std::move(pts);
  return s;
}

SourceMeasure SourceMeasure::per_simplex(std::vector<double> masses) {
  SourceMeasure s;
  s.kind = Kind::PerSimplex;
  s.simplex_mass = std::move(masses);
  return s;
}

DiscreteMeasure project_initial(const Mesh& mesh, const SourceMeasure& f0) {
  DiscreteMeasure out(mesh);
  const int nvtx = mesh.dim() + 1;
  auto deposit = [&](int s, double mass) {
    if (mass == 0.0) return;
    const auto& sp = mesh.simplex(s);
    const double share = mass / nvtx;  // barycentric weights of the barycenter
    for (int m = 0; m < nvtx; ++m) out.w[sp[m]] += share;
  };

  switch (f0.kind) {
    case SourceMeasure::Kind::BoxIndicator: {
      double total = 0.0;
      for (int s = 0; s < mesh.simplex_count(); ++s) {
        if (!simplex_overlaps_box(mesh, s, f0.support)) continue;
        double vol;
        if (mesh.dim() == 1) {
          const auto& sp = mesh.simplex(s);
          const double a = std::min(mesh.vertex(sp[0]).x, mesh.vertex(sp[1]).x);
          const double b = std::max(mesh.vertex(sp[0]).x, mesh.vertex(sp[1]).x);
          vol = std::max(0.0, std::min(b, f0.support.hi.x) - std::max(a, f0.support.lo.x));
        } else {
          const auto& sp = mesh.simplex(s);
          vol = triangle_box_area(mesh.vertex(sp[0]), mesh.vertex(sp[1]), mesh.vertex(sp[2]),
                                  f0.support);
        }
        const double m = f0.height * vol;
        deposit(s, m);
        total += m;
      }
      double expect = f0.height * (f0.support.hi.x - f0.support.lo.x);
      if (mesh.dim() == 2) expect *= (f0.support.hi.y - f0.support.lo.y);
      if (std::fabs(total - expect) > 1e-9 * std::max(1.0, expect))
        throw SupportEscapedError(f0.support.lo);
      break;
    }
    case SourceMeasure::Kind::Density: {
      // Corner check: the declared support must be covered by the mesh.
      const Box& sb = f0.support;
      for (const Vec corner : {sb.lo, sb.hi, Vec(sb.lo.x, sb.hi.y), Vec(sb.hi.x, sb.lo.y)}) {
        const Vec c = mesh.dim() == 1 ? Vec(corner.x) : corner;
        if (!mesh.locate(c)) throw SupportEscapedError(c);
      }
      const auto clipped = [&](const Vec& p) {
        return f0.support.contains(p, mesh.dim()) ? f0.density(p) : 0.0;
      };
      for (int s = 0; s < mesh.simplex_count(); ++s) {
        if (!simplex_overlaps_box(mesh, s, f0.support)) continue;
        deposit(s, simplex_density_integral(mesh, s, clipped, std::max(1, f0.refine)));
      }
      break;
    }
    case SourceMeasure::Kind::PointCloud: {
      for (const auto& [p, m] : f0.points) {
        const auto s = mesh.locate(p);
        if (!s) throw SupportEscapedError(p);
        deposit(*s, m);
      }
      break;
    }
    case SourceMeasure::Kind::PerSimplex: {
      if (static_cast<int>(f0.simplex_mass.size()) != mesh.simplex_count())
        throw ConfigError("per-simplex mass count does not match mesh");
      for (int s = 0; s < mesh.simplex_count(); ++s) deposit(s, f0.simplex_mass[s]);
      break;
    }
  }
  return out;
}

DiscreteMeasure step_forward(const Mesh& mesh, CoefficientTable& coeffs, int k,
                             const DiscreteMeasure& f, EscapePolicy policy, ClampLedger* ledger) {
  DiscreteMeasure out(mesh);
  for (int j = 0; j < mesh.vertex_count(); ++j) {
    const double wj = f.w[j];
    if (wj == 0.0) continue;
    const TransitionRow row = transition_row(mesh, coeffs, k, j, policy);
    if (row.clamped && ledger) {
      ++ledger->clamped_rows;
      ledger->clamped_row_mass += wj;
    }
    for (const auto& e : row.entries) out.w[e.target] += wj * e.weight;
  }
  for (double& wv : out.w) {
    if (wv < 0.0) {
      if (ledger) ledger->clamped_negative += -wv;
      wv = 0.0;
    }
  }
  return out;
}

DiscreteMeasure MeasurePath::at_time(double t) const {
  if (t < 0.0 || t > grid.T * (1.0 + 1e-12)) throw ConfigError("at_time: time out of range");
  const double h = grid.h();
  const int k = std::min(static_cast<int>(t / h), grid.N - 1);
  const double theta = (t - grid.t(k)) / h;
  DiscreteMeasure out(*mesh);
  for (int i = 0; i < mesh->vertex_count(); ++i)
    out.w[i] = (1.0 - theta) * steps[k].w[i] + theta * steps[k + 1].w[i];
  return out;
}

MeasurePath solve_forward(const Mesh& mesh, CoefficientTable& coeffs, const TimeGrid& grid,
                          const SourceMeasure& f0, EscapePolicy policy, ClampLedger* ledger) {
  MeasurePath path;
  path.mesh = &mesh;
  path.grid = grid;
  path.steps.reserve(grid.N + 1);
  path.steps.push_back(project_initial(mesh, f0));
  for (int k = 0; k < grid.N; ++k)
    path.steps.push_back(step_forward(mesh, coeffs, k, path.steps.back(), policy, ledger));
  return path;
}

std::vector<double> duality_gaps(const Mesh& mesh, CoefficientTable& coeffs, const TimeGrid& grid,
                                 const SourceMeasure& f0, const std::vector<GridFunction>& gs,
                                 int k, EscapePolicy policy) {
  if (k < 0 || k > grid.N) throw ConfigError("duality_gap: step out of range");
  for (const auto& g : gs)
    if (g.mesh != &mesh) throw ConfigError("duality_gap: test function lives on another mesh");

  // Forward pass, keeping every step so the backward pass can restrict each
  // sweep to the reachable support.
  std::vector<DiscreteMeasure> fpath;
  fpath.reserve(k + 1);
  fpath.push_back(project_initial(mesh, f0));
  for (int m = 0; m < k; ++m)
    fpath.push_back(step_forward(mesh, coeffs, m, fpath[m], policy, nullptr));

  const size_t nf = gs.size();
  std::vector<std::vector<double>> u(nf), next(nf);
  for (size_t f = 0; f < nf; ++f) u[f] = gs[f].values;
  for (size_t f = 0; f < nf; ++f) next[f].resize(mesh.vertex_count());
  for (int m = k - 1; m >= 0; --m) {
    for (int j = 0; j < mesh.vertex_count(); ++j) {
      if (fpath[m].w[j] == 0.0) continue;  // unreachable, value never pairs with mass
      const TransitionRow row = transition_row(mesh, coeffs, m, j, policy);
      for (size_t f = 0; f < nf; ++f) {
        double acc = 0.0;
        for (const auto& e : row.entries) acc += e.weight * u[f][e.target];
        next[f][j] = acc;
      }
    }
    std::swap(u, next);
  }

  std::vector<double> gaps(nf);
  for (size_t f = 0; f < nf; ++f) {
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < mesh.vertex_count(); ++i) {
      if (fpath[k].w[i] != 0.0) lhs += gs[f].values[i] * fpath[k].w[i];
      if (fpath[0].w[i] != 0.0) rhs += u[f][i] * fpath[0].w[i];
    }
    gaps[f] = std::fabs(lhs - rhs);
  }
  return gaps;
}

double duality_gap(const Mesh& mesh, CoefficientTable& coeffs, const TimeGrid& grid,
                   const SourceMeasure& f0, const GridFunction& g, int k, EscapePolicy policy) {
  return duality_gaps(mesh, coeffs, grid, f0, {g}, k, policy)[0];
}

}  // namespace oslc
