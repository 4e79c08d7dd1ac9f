#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "oslc/chain.hpp"

namespace oslc {

// Backward-scheme solution: one value vector per step, k = 0..N.
struct TransportSolution {
  const Mesh* mesh = nullptr;
  TimeGrid grid;
  std::vector<std::vector<double>> u;  // u[k][i]

  // Piecewise-linear in time, piecewise-affine in space.
  double evaluate(double t, const Vec& x) const;
};

// Fully discrete backward scheme from the terminal datum sampled at vertices.
TransportSolution solve_backward(const Mesh& mesh, CoefficientTable& coeffs, const TimeGrid& grid,
                                 const std::function<double(const Vec&)>& terminal,
                                 EscapePolicy policy = EscapePolicy::Fatal);

// Propagate several terminal value vectors from step `from` down to step 0 in
// one sweep; transition rows are built once per (step, vertex) and shared.
// Returns the step-0 vectors in input order.
std::vector<std::vector<double>> backward_sweep(const Mesh& mesh, CoefficientTable& coeffs,
                                                int from,
                                                std::vector<std::vector<double>> values_at_from,
                                                EscapePolicy policy = EscapePolicy::Fatal);

// Monte-Carlo value of the semi-discrete scheme: sample mean and standard
// error of terminal(walk(x, k -> N)) over independent seeded walks.
std::pair<double, double> monte_carlo_value(const ProblemFields& pf,
                                            const std::function<double(const Vec&)>& terminal,
                                            const Vec& x, int k, int samples, std::uint64_t seed);

}  // namespace oslc
