#include "oslc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace oslc {

double linf_gap(const GridFunction& f, const std::function<double(const Vec&)>& exact,
                const std::optional<Box>& roi) {
  double worst = 0.0;
  const Mesh& mesh = *f.mesh;
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    const Vec& x = mesh.vertex(i);
    if (roi && !roi->contains(x, mesh.dim())) continue;
    worst = std::max(worst, std::fabs(f.values[i] - exact(x)));
  }
  return worst;
}

double Cdf1d::eval_left(double x) const {
  if (xs.empty() || x <= xs.front()) return 0.0;
  if (x > xs.back()) return right.back();
  const auto it = std::lower_bound(xs.begin(), xs.end(), x);
  const size_t i = static_cast<size_t>(it - xs.begin());
  if (xs[i] == x) return left[i];
  // x in (xs[i-1], xs[i]): linear from right[i-1] to left[i].
  const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return right[i - 1] + t * (left[i] - right[i - 1]);
}

double Cdf1d::eval_right(double x) const {
  if (xs.empty() || x < xs.front()) return 0.0;
  if (x >= xs.back()) return right.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const size_t i = static_cast<size_t>(it - xs.begin());  // first node > x
  if (i > 0 && xs[i - 1] == x) {
    const double t = 0.0;
    (void)t;
    // Right limit at a node, then linear toward the next node.
    return right[i - 1];
  }
  const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return right[i - 1] + t * (left[i] - right[i - 1]);
}

Cdf1d Cdf1d::from_atoms(std::vector<std::pair<double, double>> atoms) {
  std::sort(atoms.begin(), atoms.end());
  Cdf1d c;
  double acc = 0.0;
  for (const auto& [x, w] : atoms) {
    if (w == 0.0) continue;
    if (!c.xs.empty() && c.xs.back() == x) {
      acc += w;
      c.right.back() = acc;
    } else {
      c.xs.push_back(x);
      c.left.push_back(acc);
      acc += w;
      c.right.push_back(acc);
    }
  }
  return c;
}

Cdf1d Cdf1d::from_step_density(const std::vector<double>& breaks,
                               const std::vector<double>& heights) {
  Cdf1d c;
  if (breaks.size() != heights.size() + 1)
    throw ConfigError("step density needs one more breakpoint than heights");
  double acc = 0.0;
  c.xs.push_back(breaks[0]);
  c.left.push_back(0.0);
  c.right.push_back(0.0);
  for (size_t i = 0; i < heights.size(); ++i) {
    acc += heights[i] * (breaks[i + 1] - breaks[i]);
    c.xs.push_back(breaks[i + 1]);
    c.left.push_back(acc);
    c.right.push_back(acc);
  }
  return c;
}

Cdf1d cdf_of(const DiscreteMeasure& mu) {
  if (mu.mesh->dim() != 1) throw ConfigError("cdf_of requires a 1-D measure");
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(mu.w.size());
  for (size_t i = 0; i < mu.w.size(); ++i)
    if (mu.w[i] != 0.0) atoms.emplace_back(mu.mesh->vertex(static_cast<int>(i)).x, mu.w[i]);
  return Cdf1d::from_atoms(std::move(atoms));
}

double wasserstein1_1d(const Cdf1d& mu, const Cdf1d& nu) {
  if (std::fabs(mu.total() - nu.total()) > 1e-9)
    throw ConfigError("wasserstein1_1d: mass mismatch (" + std::to_string(mu.total()) + " vs " +
                      std::to_string(nu.total()) + ")");
  std::vector<double> breaks;
  breaks.reserve(mu.xs.size() + nu.xs.size());
  breaks.insert(breaks.end(), mu.xs.begin(), mu.xs.end());
  breaks.insert(breaks.end(), nu.xs.begin(), nu.xs.end());
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double total = 0.0;
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    const double g0 = mu.eval_right(a) - nu.eval_right(a);
    const double g1 = mu.eval_left(b) - nu.eval_left(b);
    const double len = b - a;
    if (g0 * g1 >= 0.0) {
      total += 0.5 * (std::fabs(g0) + std::fabs(g1)) * len;
    } else {
      // Linear difference changes sign inside the interval.
      const double root = g0 / (g0 - g1);
      total += 0.5 * (std::fabs(g0) * root + std::fabs(g1) * (1.0 - root)) * len;
    }
  }
  return total;
}

double wasserstein1_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return wasserstein1_1d(cdf_of(mu), cdf_of(nu));
}

double wasserstein1_1d(const DiscreteMeasure& mu, const Cdf1d& nu) {
  return wasserstein1_1d(cdf_of(mu), nu);
}

double second_moment(const DiscreteMeasure& f) {
  double acc = 0.0;
  for (size_t i = 0; i < f.w.size(); ++i)
    acc += f.w[i] * f.mesh->vertex(static_cast<int>(i)).norm2();
  return acc;
}

Vec center_of_mass(const DiscreteMeasure& f) {
  const double m = f.mass();
  if (m <= 0.0) throw ConfigError("center_of_mass: zero total mass");
  Vec acc;
  for (size_t i = 0; i < f.w.size(); ++i) acc += f.w[i] * f.mesh->vertex(static_cast<int>(i));
  return acc * (1.0 / m);
}

std::string ConvergenceTable::to_csv() const {
  std::ostringstream out;
  out << "dx,h";
  if (with_linf) out << ",error_linf,order_linf";
  if (with_w1) out << ",error_w1,order_w1";
  out << "\n";
  const auto ol = observed_orders(*this, &ConvergenceRow::error_linf);
  const auto ow = observed_orders(*this, &ConvergenceRow::error_w1);
  char buf[192];
  for (size_t i = 0; i < rows.size(); ++i) {
    auto ord = [&](const std::vector<double>& o) {
      if (i == 0 || std::isnan(o[i - 1])) return std::string("-");
      std::snprintf(buf, sizeof buf, "%.4f", o[i - 1]);
      return std::string(buf);
    };
    std::snprintf(buf, sizeof buf, "%.6g,%.6g", rows[i].dx, rows[i].h);
    out << buf;
    if (with_linf) {
      std::snprintf(buf, sizeof buf, ",%.10g,%s", rows[i].error_linf, ord(ol).c_str());
      out << buf;
    }
    if (with_w1) {
      std::snprintf(buf, sizeof buf, ",%.10g,%s", rows[i].error_w1, ord(ow).c_str());
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

std::string ConvergenceTable::to_text() const {
  std::ostringstream out;
  const auto ol = observed_orders(*this, &ConvergenceRow::error_linf);
  const auto ow = observed_orders(*this, &ConvergenceRow::error_w1);
  char buf[192];
  std::snprintf(buf, sizeof buf, "%10s %10s", "dx", "h");
  out << buf;
  if (with_linf) {
    std::snprintf(buf, sizeof buf, " %14s %8s", "Linf", "order");
    out << buf;
  }
  if (with_w1) {
    std::snprintf(buf, sizeof buf, " %14s %8s", "W1", "order");
    out << buf;
  }
  out << "\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    auto ord = [&](const std::vector<double>& o) -> std::string {
      if (i == 0) return "-";
      if (std::isnan(o[i - 1])) return "undef";
      std::snprintf(buf, sizeof buf, "%.3f", o[i - 1]);
      return buf;
    };
    std::snprintf(buf, sizeof buf, "%10.4g %10.4g", rows[i].dx, rows[i].h);
    out << buf;
    if (with_linf) {
      std::snprintf(buf, sizeof buf, " %14.6e %8s", rows[i].error_linf, ord(ol).c_str());
      out << buf;
    }
    if (with_w1) {
      std::snprintf(buf, sizeof buf, " %14.6e %8s", rows[i].error_w1, ord(ow).c_str());
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

std::vector<double> observed_orders(const ConvergenceTable& table,
                                    double ConvergenceRow::*error_field) {
  std::vector<double> orders;
  for (size_t i = 0; i + 1 < table.rows.size(); ++i) {
    const double e0 = table.rows[i].*error_field;
    const double e1 = table.rows[i + 1].*error_field;
    const double d0 = table.rows[i].dx;
    const double d1 = table.rows[i + 1].dx;
    if (e0 <= 0.0 || e1 <= 0.0 || d0 == d1)
      orders.push_back(std::numeric_limits<double>::quiet_NaN());
    else
      orders.push_back(std::log(e0 / e1) / std::log(d0 / d1));
  }
  return orders;
}

}  // namespace oslc
