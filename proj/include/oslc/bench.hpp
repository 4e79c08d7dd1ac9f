#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oslc/conservative.hpp"
#include "oslc/fields.hpp"
#include "oslc/metrics.hpp"

namespace oslc {

// Closed-form solutions of the 1-D two-speed benchmark on [0, 2]:
// forward density started from 1_{[-1,1]} and the dual backward value whose
// terminal datum is the cumulative distribution of the final density.
double test1_exact_f(double t, double x);
double test1_exact_u(double t, double x);
double test1_terminal(double x);  // u_T, the CDF of f(2, .)
Cdf1d test1_exact_cdf(double t);  // exact CDF of f(t, .)

// A benchmark problem: coefficient fields plus domain, data and defaults.
struct BuiltinProblem {
  std::string id;
  ProblemFields fields;  // grid preset to the default (dx, h) pairing
  Box domain;            // computational box (already enlarged where needed)
  double dx = 0.0;       // default target simplex diameter
  std::function<double(const Vec&)> terminal;
  SourceMeasure initial;
  Box roi;  // window for error norms and snapshots
  EscapePolicy policy = EscapePolicy::Fatal;
  double margin_floor = 0.0;  // T*C0 + 5*sqrt(T)*C2 + radius*h
};

// ids: "test1" (1-D, exact solutions), "test2" (rotating field, sigma=1e-3),
// "test3" (moving discontinuity, degenerate sigma).
BuiltinProblem builtin_problem(const std::string& id);

enum class CouplingRule {
  Fixed,            // h given explicitly
  DxOverHToZero,    // h = 0.814 * dx^(2/3)   (transport ladders)
  Dx2OverHBounded,  // h = 3 * dx             (conservative ladders)
};

double coupled_h(CouplingRule rule, double dx, double fixed_h);

// Flat key=value run description; unknown keys are rejected. See
// ExperimentConfig::schema() for the key list.
struct ExperimentConfig {
  std::string mode = "transport";  // transport|conservative|ladder|check
  std::string test = "test1";
  std::string node_file;  // optional Triangle import (2-D tests)
  std::string ele_file;
  std::string drift_csv;  // optional tabulated drift replacing the test's b
  double dx = 0.0;  // 0 keeps the problem default
  double h = 0.0;   // 0 derives h from the coupling rule
  CouplingRule coupling = CouplingRule::Fixed;
  double T = 0.0;  // 0 keeps the problem default
  std::vector<double> ladder_dx;
  std::string ladder_target = "conservative";  // conservative|transport
  double sigma_scale = 1.0;
  std::optional<Box> roi;
  double margin = -1.0;  // -1 = auto (the invariant floor)
  MollifierSpec::Profile moll_profile = MollifierSpec::Profile::Gaussian;
  bool moll_set = false;    // profile key present in the config
  double moll_radius = 0.0;  // 0 keeps the spec default
  int moll_nodes = 0;        // 0 keeps the spec default
  int time_points = 0;       // 0 keeps the problem default
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int snapshots = 5;     // time slices written per run
  int duality_tests = 20;
  int oslc_pairs = 10000;
  bool dump_mesh = false;
  int dump_rows = -1;  // step whose transition rows are dumped; -1 = none

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig parse_file(const std::string& path);
  static std::string schema();
  std::string echo() const;  // full round-trippable key=value dump
};

struct ExperimentResult {
  int exit_code = 0;  // 0 pass, 2 invariant failure, 3 solver error, 4 config error
  std::string summary;
};

// Runs one experiment and writes CSV artifacts plus summary.txt and
// config_echo.txt under cfg.out_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace oslc
