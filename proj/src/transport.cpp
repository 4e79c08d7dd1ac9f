#include "oslc/transport.hpp"

#include <algorithm>
#include <cmath>

namespace oslc {

double TransportSolution::evaluate(double t, const Vec& x) const {
  if (t < 0.0 || t > grid.T * (1.0 + 1e-12)) throw ConfigError("evaluate: time out of range");
  const double h = grid.h();
  const int k = std::min(static_cast<int>(t / h), grid.N - 1);
  const double theta = (t - grid.t(k)) / h;
  const GridFunction fk(*mesh, u[k]);
  const GridFunction fk1(*mesh, u[k + 1]);
  return (1.0 - theta) * interpolate(fk, x) + theta * interpolate(fk1, x);
}

std::vector<std::vector<double>> backward_sweep(const Mesh& mesh, CoefficientTable& coeffs,
                                                int from,
                                                std::vector<std::vector<double>> values,
                                                EscapePolicy policy) {
  const int nv = mesh.vertex_count();
  const size_t nf = values.size();
  std::vector<std::vector<double>> next(nf, std::vector<double>(nv));
  for (int k = from - 1; k >= 0; --k) {
    for (int j = 0; j < nv; ++j) {
      const TransitionRow row = transition_row(mesh, coeffs, k, j, policy);
      for (size_t f = 0; f < nf; ++f) {
        double acc = 0.0;
        for (const auto& e : row.entries) acc += e.weight * values[f][e.target];
        next[f][j] = acc;
      }
    }
    std::swap(values, next);
  }
  return values;
}

TransportSolution solve_backward(const Mesh& mesh, CoefficientTable& coeffs, const TimeGrid& grid,
                                 const std::function<double(const Vec&)>& terminal,
                                 EscapePolicy policy) {
  const int nv = mesh.vertex_count();
  TransportSolution sol;
  sol.mesh = &mesh;
  sol.grid = grid;
  sol.u.assign(grid.N + 1, {});
  sol.u[grid.N].resize(nv);
  for (int i = 0; i < nv; ++i) sol.u[grid.N][i] = terminal(mesh.vertex(i));
  for (int k = grid.N - 1; k >= 0; --k) {
    sol.u[k].resize(nv);
    for (int j = 0; j < nv; ++j) {
      const TransitionRow row = transition_row(mesh, coeffs, k, j, policy);
      double acc = 0.0;
      for (const auto& e : row.entries) acc += e.weight * sol.u[k + 1][e.target];
      sol.u[k][j] = acc;
    }
  }
  return sol;
}

std::pair<double, double> monte_carlo_value(const ProblemFields& pf,
                                            const std::function<double(const Vec&)>& terminal,
                                            const Vec& x, int k, int samples, std::uint64_t seed) {
  if (samples < 2) throw ConfigError("monte_carlo_value: need at least two samples");
  CounterRng root(seed, 0x3a1c);
  double sum = 0.0, sum2 = 0.0;
  for (int n = 0; n < samples; ++n) {
    CounterRng rng = root.split(static_cast<std::uint64_t>(n));
    const double v = terminal(walk(pf, x, k, pf.grid.N, rng));
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / samples;
  const double var = std::max(0.0, (sum2 - samples * mean * mean) / (samples - 1));
  return {mean, std::sqrt(var / samples)};
}

}  // namespace oslc
