#pragma once

#include <functional>
#include <vector>

#include "oslc/fields.hpp"
#include "oslc/mesh.hpp"
#include "oslc/rng.hpp"

namespace oslc {

// Any characteristic endpoint left the mesh hull: the computational domain is
// too small for the requested run.
struct EndpointEscapedError : MeshError {
  int step;
  int vertex;
  Vec point;
  EndpointEscapedError(int k, int j, Vec p)
      : MeshError("endpoint of vertex " + std::to_string(j) + " at step " + std::to_string(k) +
                  " escaped the hull at (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                  ")"),
        step(k),
        vertex(j),
        point(p) {}
};

// The 2r one-step characteristic endpoints of one vertex.
struct EndpointSet {
  std::vector<Vec> plus;   // x - h b + sqrt(rh) sigma_l
  std::vector<Vec> minus;  // x - h b - sqrt(rh) sigma_l
};

EndpointSet endpoints(CoefficientTable& coeffs, int k, int j);

struct TransitionEntry {
  int target;
  double weight;
};

// Sparse row p^k_{j.}: barycentric weights of the 2r endpoints, 1/(2r) each.
struct TransitionRow {
  int source = -1;
  int step = -1;
  std::vector<TransitionEntry> entries;
  bool clamped = false;  // some endpoint was projected back onto the hull
};

enum class EscapePolicy {
  Fatal,        // throw EndpointEscapedError
  ClampToHull,  // project the endpoint onto the hull and flag the row
};

TransitionRow transition_row(const Mesh& mesh, CoefficientTable& coeffs, int k, int j,
                             EscapePolicy policy = EscapePolicy::Fatal);

// H^h(psi, x, k) = [S^h(psi, x, k) - psi(x)] / h with exact psi evaluation.
double discrete_generator(const ProblemFields& pf, const std::function<double(const Vec&)>& psi,
                          int k, const Vec& x);

// One sampled Euler-chain trajectory from step `from` to step `to`; coefficients
// are evaluated at the walker's position (the vertex table is bypassed).
Vec walk(const ProblemFields& pf, Vec x, int from, int to, CounterRng& rng);

// CSV dump (k, j, i, p) of all rows for one step.
void dump_transition_rows(const Mesh& mesh, CoefficientTable& coeffs, int k,
                          const std::string& path, EscapePolicy policy = EscapePolicy::Fatal);

}  // namespace oslc
