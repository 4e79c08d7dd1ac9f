#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oslc/conservative.hpp"
#include "oslc/mesh.hpp"

namespace oslc {

// Max over vertices of |f(i) - exact(x_i)|, optionally restricted to `roi`.
double linf_gap(const GridFunction& f, const std::function<double(const Vec&)>& exact,
                const std::optional<Box>& roi = std::nullopt);

// Piecewise-linear CDF of a finite measure on R: nodes with left/right limits
// (jumps allowed), linear between nodes, constant outside.
struct Cdf1d {
  std::vector<double> xs;
  std::vector<double> left;   // F(x_i^-)
  std::vector<double> right;  // F(x_i^+)

  double total() const { return xs.empty() ? 0.0 : right.back(); }
  double eval_left(double x) const;
  double eval_right(double x) const;

  static Cdf1d from_atoms(std::vector<std::pair<double, double>> atoms);
  // Piecewise-constant density: heights[i] on [breaks[i], breaks[i+1]).
  static Cdf1d from_step_density(const std::vector<double>& breaks,
                                 const std::vector<double>& heights);
};

Cdf1d cdf_of(const DiscreteMeasure& mu);

// Exact integral of |F_mu - F_nu| over R (equal masses required to 1e-9).
double wasserstein1_1d(const Cdf1d& mu, const Cdf1d& nu);
double wasserstein1_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
double wasserstein1_1d(const DiscreteMeasure& mu, const Cdf1d& nu);

double second_moment(const DiscreteMeasure& f);
Vec center_of_mass(const DiscreteMeasure& f);

struct ConvergenceRow {
  double dx = 0.0;
  double h = 0.0;
  double error_linf = 0.0;
  double error_w1 = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;  // sorted by decreasing dx
  bool with_linf = true;
  bool with_w1 = true;

  std::string to_csv() const;
  std::string to_text() const;
};

// order_m = ln(e_m / e_{m+1}) / ln(dx_m / dx_{m+1}); NaN marks an undefined
// entry (a zero error row).
std::vector<double> observed_orders(const ConvergenceTable& table,
                                    double ConvergenceRow::*error_field);

}  // namespace oslc
