#include "oslc/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>

#include "oslc/rng.hpp"

namespace oslc {

namespace {

// Quadrature for the spatial convolution b * rho_h, in units of h.
struct MollQuad {
  std::vector<Vec> offsets;
  std::vector<double> weights;  // renormalized to sum 1
  double defect = 0.0;          // |1 - sum| before renormalization
};

double profile_value(MollifierSpec::Profile p, int dim, const Vec& u) {
  const double s2 = u.x * u.x + (dim == 2 ? u.y * u.y : 0.0);
  switch (p) {
    case MollifierSpec::Profile::Gaussian:
      return std::exp(-0.5 * s2) / std::pow(2.0 * M_PI, 0.5 * dim);
    case MollifierSpec::Profile::Bump: {
      if (s2 >= 1.0) return 0.0;
      // Normalization constants for exp(-1/(1-|u|^2)) on B(0,1).
      constexpr double kNorm1 = 0.443993816168079438;
      constexpr double kNorm2 = 0.466512393178330069;
      return std::exp(-1.0 / (1.0 - s2)) / (dim == 1 ? kNorm1 : kNorm2);
    }
  }
  return 0.0;
}

MollQuad build_quadrature(const MollifierSpec& spec, int dim) {
  if (spec.nodes < 1) throw ConfigError("mollifier quadrature needs at least one node");
  if (!(spec.radius > 0)) throw ConfigError("mollifier truncation radius must be positive");
  const int npts = 2 * spec.nodes + 1;
  const double du = 2.0 * spec.radius / npts;
  std::vector<double> axis(npts);
  for (int i = 0; i < npts; ++i) axis[i] = -spec.radius + (i + 0.5) * du;

  MollQuad q;
  double sum = 0.0;
  if (dim == 1) {
    for (int i = 0; i < npts; ++i) {
      const double w = profile_value(spec.profile, 1, Vec(axis[i])) * du;
      if (w <= 0.0) continue;
      q.offsets.emplace_back(axis[i]);
      q.weights.push_back(w);
      sum += w;
    }
  } else {
    for (int j = 0; j < npts; ++j)
      for (int i = 0; i < npts; ++i) {
        const double w = profile_value(spec.profile, 2, Vec(axis[i], axis[j])) * du * du;
        if (w <= 0.0) continue;
        q.offsets.emplace_back(axis[i], axis[j]);
        q.weights.push_back(w);
        sum += w;
      }
  }
  q.defect = std::fabs(1.0 - sum);
  for (double& w : q.weights) w /= sum;
  return q;
}

const MollQuad& quadrature_for(const MollifierSpec& spec, int dim) {
  struct Entry {
    MollifierSpec spec;
    int dim;
    MollQuad quad;
  };
  static std::vector<Entry> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  for (const auto& e : cache)
    if (e.dim == dim && e.spec.profile == spec.profile && e.spec.radius == spec.radius &&
        e.spec.nodes == spec.nodes)
      return e.quad;
  cache.push_back({spec, dim, build_quadrature(spec, dim)});
  return cache.back().quad;
}

}  // namespace

double mollifier_profile(const MollifierSpec& spec, int dim, const Vec& u) {
  return profile_value(spec.profile, dim, u);
}

double mollifier_truncation_defect(const MollifierSpec& spec, int dim) {
  return quadrature_for(spec, dim).defect;
}

Vec mollified_drift_at(const ProblemFields& pf, double t, const Vec& x) {
  const MollQuad& q = quadrature_for(pf.mollifier, pf.dim);
  const double h = pf.h();
  Vec acc;
  for (size_t n = 0; n < q.offsets.size(); ++n)
    acc += q.weights[n] * pf.drift.eval(t, x - h * q.offsets[n]);
  return acc;
}

Vec mollified_drift(const ProblemFields& pf, int k, const Vec& x) {
  if (k < 0 || k >= pf.grid.N) throw ConfigError("mollified_drift: step out of range");
  if (pf.time_points < 1) throw ConfigError("time average needs at least one point");
  const double h = pf.h();
  const double tk = pf.grid.t(k);
  Vec acc;
  for (int m = 0; m < pf.time_points; ++m)
    acc += mollified_drift_at(pf, tk + (m + 0.5) * h / pf.time_points, x);
  return acc * (1.0 / pf.time_points);
}

Vec averaged_sigma(const ProblemFields& pf, int k, int col, const Vec& x) {
  if (k < 0 || k >= pf.grid.N) throw ConfigError("averaged_sigma: step out of range");
  if (col < 0 || col >= pf.diffusion.r) throw ConfigError("averaged_sigma: column out of range");
  if (pf.time_points < 1) throw ConfigError("time average needs at least one point");
  const double h = pf.h();
  const double tk = pf.grid.t(k);
  Vec acc;
  for (int m = 0; m < pf.time_points; ++m)
    acc += pf.diffusion.column(tk + (m + 0.5) * h / pf.time_points, x, col);
  return acc * (1.0 / pf.time_points);
}

OslcReport check_oslc(const VelocityField& field, const TimeGrid& grid, const Box& sample_box,
                      int dim, int pairs, std::uint64_t seed, double declared_c1) {
  if (pairs < 1) throw ConfigError("check_oslc: need at least one pair");
  CounterRng rng(seed, 0x05cc);
  auto sample_point = [&](CounterRng& r) {
    Vec p;
    p.x = sample_box.lo.x + (sample_box.hi.x - sample_box.lo.x) * r.next_double();
    if (dim == 2) p.y = sample_box.lo.y + (sample_box.hi.y - sample_box.lo.y) * r.next_double();
    return p;
  };
  auto ratio = [&](double t, const Vec& x, const Vec& y) {
    const Vec d = x - y;
    const double n2 = d.norm2();
    if (n2 == 0.0) return -std::numeric_limits<double>::infinity();
    return -(field.eval(t, x) - field.eval(t, y)).dot(d) / n2;
  };

  OslcReport rep;
  rep.estimate = -std::numeric_limits<double>::infinity();
  struct Worst {
    double r;
    double t;
    Vec x, y;
  };
  std::vector<Worst> top;
  const double diam = std::max(sample_box.hi.x - sample_box.lo.x,
                               dim == 2 ? sample_box.hi.y - sample_box.lo.y : 0.0);
  for (int n = 0; n < pairs; ++n) {
    const double t = grid.T * rng.next_double();
    const Vec x = sample_point(rng);
    Vec y;
    if (n % 2 == 0) {
      y = sample_point(rng);
    } else {
      // Short-range pair: log-uniform separation down to 1e-9 * diameter.
      const double scale = diam * std::pow(10.0, -9.0 * rng.next_double());
      const double ang = 2.0 * M_PI * rng.next_double();
      y = dim == 1 ? Vec(x.x + scale * (rng.next_double() < 0.5 ? 1.0 : -1.0))
                   : Vec(x.x + scale * std::cos(ang), x.y + scale * std::sin(ang));
    }
    if ((x - y).norm2() == 0.0) continue;  // coincident pair, skipped
    ++rep.samples_used;
    const double r = ratio(t, x, y);
    rep.estimate = std::max(rep.estimate, r);
    top.push_back({r, t, x, y});
    std::push_heap(top.begin(), top.end(), [](const Worst& a, const Worst& b) { return a.r > b.r; });
    if (top.size() > 16) {
      std::pop_heap(top.begin(), top.end(), [](const Worst& a, const Worst& b) { return a.r > b.r; });
      top.pop_back();
    }
  }
  // Bisection refinement: shrink the worst pairs toward the violating set, so a
  // genuine OSLC violation is detected at vanishing separation.
  for (Worst w : top) {
    for (int it = 0; it < 60 && (w.x - w.y).norm2() > 1e-28; ++it) {
      const Vec m = (w.x + w.y) * 0.5;
      const double rxm = ratio(w.t, w.x, m);
      const double rmy = ratio(w.t, m, w.y);
      if (rxm >= rmy)
        w.y = m;
      else
        w.x = m;
      rep.estimate = std::max(rep.estimate, std::max(rxm, rmy));
    }
  }
  rep.pass = declared_c1 >= 0.0 && rep.estimate <= declared_c1 + 1e-9;
  return rep;
}

CoefficientTable::CoefficientTable(const ProblemFields& pf, const Mesh& mesh)
    : pf_(&pf),
      mesh_(&mesh),
      static_coeffs_(!pf.drift.time_dependent && !pf.diffusion.time_dependent),
      ready_(mesh.vertex_count(), 0),
      b_(mesh.vertex_count()),
      sig_(static_cast<size_t>(mesh.vertex_count()) * pf.diffusion.r) {}

int CoefficientTable::slot(int k) {
  if (static_coeffs_) return 0;
  if (k != cached_k_) {
    std::fill(ready_.begin(), ready_.end(), 0);
    cached_k_ = k;
  }
  return k;
}

void CoefficientTable::ensure_vertex(int k, int v) {
  if (ready_[v]) return;
  const int kk = static_coeffs_ ? 0 : k;
  const Vec x = mesh_->vertex(v);
  b_[v] = mollified_drift(*pf_, kk, x);
  const int r = pf_->diffusion.r;
  for (int l = 0; l < r; ++l) sig_[static_cast<size_t>(v) * r + l] = averaged_sigma(*pf_, kk, l, x);
  ready_[v] = 1;
}

void CoefficientTable::ensure_step(int k) {
  slot(k);
  for (int v = 0; v < mesh_->vertex_count(); ++v) ensure_vertex(k, v);
}

Vec CoefficientTable::drift(int k, int vertex) {
  slot(k);
  ensure_vertex(k, vertex);
  return b_[vertex];
}

Vec CoefficientTable::sigma(int k, int col, int vertex) {
  slot(k);
  ensure_vertex(k, vertex);
  return sig_[static_cast<size_t>(vertex) * pf_->diffusion.r + col];
}

VelocityField constant_drift(const Vec& c) {
  VelocityField f;
  f.eval = [c](double, const Vec&) { return c; };
  f.c0 = c.norm();
  f.c1 = 0.0;
  f.time_dependent = false;
  return f;
}

VelocityField tabulated_drift(const std::string& csv_text, int dim) {
  struct Sample {
    double t;
    Vec x;
    Vec b;
  };
  auto samples = std::make_shared<std::vector<Sample>>();
  std::stringstream ss(csv_text);
  std::string line;
  int lineno = 0;
  double c0 = 0.0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ls(line);
    std::vector<double> nums;
    std::string item;
    while (std::getline(ls, item, ',')) {
      try {
        nums.push_back(std::stod(item));
      } catch (const std::exception&) {
        nums.clear();
        break;
      }
    }
    if (nums.empty() && lineno == 1) continue;  // header row
    const size_t want = dim == 1 ? 3u : 5u;
    if (nums.size() != want)
      throw ConfigError("tabulated drift line " + std::to_string(lineno) + ": expected " +
                        std::to_string(want) + " numbers");
    Sample s;
    s.t = nums[0];
    if (dim == 1) {
      s.x = Vec(nums[1]);
      s.b = Vec(nums[2]);
    } else {
      s.x = Vec(nums[1], nums[2]);
      s.b = Vec(nums[3], nums[4]);
    }
    c0 = std::max(c0, s.b.norm());
    samples->push_back(s);
  }
  if (samples->empty()) throw ConfigError("tabulated drift: no samples");
  VelocityField f;
  f.eval = [samples](double t, const Vec& x) {
    double best = std::numeric_limits<double>::infinity();
    Vec value;
    for (const auto& s : *samples) {
      const double d = (s.x - x).norm2() + (s.t - t) * (s.t - t);
      if (d < best) {
        best = d;
        value = s.b;
      }
    }
    return value;
  };
  f.c0 = c0;
  f.c1 = -1.0;
  f.time_dependent = true;
  return f;
}

}  // namespace oslc
