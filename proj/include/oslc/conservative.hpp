#pragma once

#include <functional>
#include <vector>

#include "oslc/chain.hpp"

namespace oslc {

// Nonnegative vertex weights representing f^Delta_k = sum_i w_i delta_{x_i}.
struct DiscreteMeasure {
  const Mesh* mesh = nullptr;
  std::vector<double> w;

  DiscreteMeasure() = default;
  explicit DiscreteMeasure(const Mesh& m) : mesh(&m), w(m.vertex_count(), 0.0) {}

  double mass() const;  // compensated sum
};

// Initial measure: density rule over a support box, exact box indicator,
// weighted point cloud, or masses given directly per simplex.
struct SourceMeasure {
  enum class Kind { Density, BoxIndicator, PointCloud, PerSimplex };
  Kind kind = Kind::BoxIndicator;

  std::function<double(const Vec&)> density;  // Kind::Density
  Box support;                                // Density and BoxIndicator
  double height = 1.0;                        // BoxIndicator
  int refine = 4;                             // density quadrature per axis
  std::vector<std::pair<Vec, double>> points; // PointCloud
  std::vector<double> simplex_mass;           // PerSimplex

  static SourceMeasure box_indicator(const Box& b, double height = 1.0);
  static SourceMeasure density_rule(std::function<double(const Vec&)> f, const Box& support,
                                    int refine = 4);
  static SourceMeasure point_cloud(std::vector<std::pair<Vec, double>> pts);
  static SourceMeasure per_simplex(std::vector<double> masses);
};

struct SupportEscapedError : MeshError {
  Vec point;
  SupportEscapedError(Vec p)
      : MeshError("initial mass at (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                  ") is outside the mesh hull"),
        point(p) {}
};

// Barycenter projection: each simplex mass split evenly among its vertices.
DiscreteMeasure project_initial(const Mesh& mesh, const SourceMeasure& f0);

// Round-off bookkeeping for the forward evolution.
struct ClampLedger {
  long clamped_rows = 0;        // rows with a hull-projected endpoint
  double clamped_row_mass = 0;  // mass transported through such rows
  double clamped_negative = 0;  // negative round-off weight zeroed out
};

// One push-forward step: f_{k+1}(i) = sum_j p^k_{ji} f_k(j). Rows are built
// only for weight-carrying vertices.
DiscreteMeasure step_forward(const Mesh& mesh, CoefficientTable& coeffs, int k,
                             const DiscreteMeasure& f, EscapePolicy policy = EscapePolicy::Fatal,
                             ClampLedger* ledger = nullptr);

struct MeasurePath {
  const Mesh* mesh = nullptr;
  TimeGrid grid;
  std::vector<DiscreteMeasure> steps;  // k = 0..N

  // Linear-in-time blend of the two bracketing step measures.
  DiscreteMeasure at_time(double t) const;
};

MeasurePath solve_forward(const Mesh& mesh, CoefficientTable& coeffs, const TimeGrid& grid,
                          const SourceMeasure& f0, EscapePolicy policy = EscapePolicy::Fatal,
                          ClampLedger* ledger = nullptr);

// |<g, f^Delta_k> - <u^Delta_0, f^Delta_0>| with u^Delta the backward scheme
// run from step k with terminal datum g. Both directions traverse the same
// deterministic transition rows, so the gap is pure round-off.
double duality_gap(const Mesh& mesh, CoefficientTable& coeffs, const TimeGrid& grid,
                   const SourceMeasure& f0, const GridFunction& g, int k,
                   EscapePolicy policy = EscapePolicy::Fatal);

// Same, sharing the row traversal across many test functions.
std::vector<double> duality_gaps(const Mesh& mesh, CoefficientTable& coeffs, const TimeGrid& grid,
                                 const SourceMeasure& f0, const std::vector<GridFunction>& gs,
                                 int k, EscapePolicy policy = EscapePolicy::Fatal);

}  // namespace oslc
