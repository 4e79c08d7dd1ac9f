#include "oslc/chain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace oslc {

EndpointSet endpoints(CoefficientTable& coeffs, int k, int j) {
  const ProblemFields& pf = coeffs.fields();
  const double h = pf.h();
  const int r = pf.diffusion.r;
  const double step_scale = std::sqrt(r * h);
  const Vec base = coeffs.mesh().vertex(j) - h * coeffs.drift(k, j);
  EndpointSet out;
  out.plus.reserve(r);
  out.minus.reserve(r);
  for (int l = 0; l < r; ++l) {
    const Vec s = step_scale * coeffs.sigma(k, l, j);
    out.plus.push_back(base + s);
    out.minus.push_back(base - s);
  }
  return out;
}

namespace {

// Locate `p`, clamping onto the hull when allowed. Returns false when the
// point escaped under the Fatal policy caller contract (throwing is done by
// the caller with full context).
struct Located {
  int simplex;
  Vec point;
  bool clamped;
};

Located locate_endpoint(const Mesh& mesh, const Vec& p, EscapePolicy policy, int k, int j) {
  if (auto s = mesh.locate(p)) return {*s, p, false};
  if (policy == EscapePolicy::Fatal) throw EndpointEscapedError(k, j, p);
  // Project onto the hull: clamp to the bounding box first; if the mesh does
  // not fill its box, fall back to the nearest vertex.
  const Vec q = mesh.bounding_box().clamp(p);
  if (auto s = mesh.locate(q)) return {*s, q, true};
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const double d = (mesh.vertex(v) - p).norm2();
    if (d < best_d) {
      best_d = d;
      best = v;
    }
  }
  const Vec vx = mesh.vertex(best);
  auto s = mesh.locate(vx);
  if (!s) throw EndpointEscapedError(k, j, p);
  return {*s, vx, true};
}

void scatter_endpoint(const Mesh& mesh, const Located& loc, double scale,
                      std::vector<TransitionEntry>& entries) {
  const auto bc = mesh.barycentric_coords(loc.simplex, loc.point);
  const auto& sp = mesh.simplex(loc.simplex);
  const int nv = mesh.dim() + 1;
  for (int m = 0; m < nv; ++m) {
    const double w = scale * std::max(bc[m], 0.0);  // round-off negatives dropped
    if (w == 0.0) continue;
    entries.push_back({sp[m], w});
  }
}

}  // namespace

TransitionRow transition_row(const Mesh& mesh, CoefficientTable& coeffs, int k, int j,
                             EscapePolicy policy) {
  const int r = coeffs.fields().diffusion.r;
  const EndpointSet ep = endpoints(coeffs, k, j);
  TransitionRow row;
  row.source = j;
  row.step = k;
  row.entries.reserve(2 * r * (mesh.dim() + 1));
  const double scale = 1.0 / (2.0 * r);
  for (int l = 0; l < r; ++l) {
    const Located lp = locate_endpoint(mesh, ep.plus[l], policy, k, j);
    const Located lm = locate_endpoint(mesh, ep.minus[l], policy, k, j);
    row.clamped = row.clamped || lp.clamped || lm.clamped;
    scatter_endpoint(mesh, lp, scale, row.entries);
    scatter_endpoint(mesh, lm, scale, row.entries);
  }
  // Merge duplicate targets.
  std::sort(row.entries.begin(), row.entries.end(),
            [](const TransitionEntry& a, const TransitionEntry& b) { return a.target < b.target; });
  size_t w = 0;
  for (size_t i = 0; i < row.entries.size(); ++i) {
    if (w > 0 && row.entries[w - 1].target == row.entries[i].target)
      row.entries[w - 1].weight += row.entries[i].weight;
    else
      row.entries[w++] = row.entries[i];
  }
  row.entries.resize(w);
  return row;
}

double discrete_generator(const ProblemFields& pf, const std::function<double(const Vec&)>& psi,
                          int k, const Vec& x) {
  const double h = pf.h();
  const int r = pf.diffusion.r;
  const double step_scale = std::sqrt(r * h);
  const Vec base = x - h * mollified_drift(pf, k, x);
  double acc = 0.0;
  for (int l = 0; l < r; ++l) {
    const Vec s = step_scale * averaged_sigma(pf, k, l, x);
    acc += psi(base + s) + psi(base - s);
  }
  return (acc / (2.0 * r) - psi(x)) / h;
}

Vec walk(const ProblemFields& pf, Vec x, int from, int to, CounterRng& rng) {
  if (from > to || to > pf.grid.N) throw ConfigError("walk: need from <= to <= N");
  const double h = pf.h();
  const int r = pf.diffusion.r;
  const double step_scale = std::sqrt(r * h);
  for (int m = from; m < to; ++m) {
    // Z has exactly one active coordinate: draw it, then its sign.
    const int l = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(r)));
    const double z = rng.next_double() < 0.5 ? 1.0 : -1.0;
    const Vec s = averaged_sigma(pf, m, l, x);
    x = x - h * mollified_drift(pf, m, x) + (step_scale * z) * s;
  }
  return x;
}

void dump_transition_rows(const Mesh& mesh, CoefficientTable& coeffs, int k,
                          const std::string& path, EscapePolicy policy) {
  std::ofstream f(path);
  if (!f) throw MeshError("cannot write " + path);
  f << "k,j,i,p\n";
  char buf[80];
  for (int j = 0; j < mesh.vertex_count(); ++j) {
    const TransitionRow row = transition_row(mesh, coeffs, k, j, policy);
    for (const auto& e : row.entries) {
      std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g\n", k, j, e.target, e.weight);
      f << buf;
    }
  }
}

}  // namespace oslc
