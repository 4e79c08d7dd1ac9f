#include "oslc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oslc/chain.hpp"
#include "oslc/mesh_io.hpp"
#include "oslc/rng.hpp"
#include "oslc/transport.hpp"

namespace oslc {

double test1_exact_f(double t, double x) {
  if (t <= 1.0) {
    double v = 0.0;
    if (x >= -1.0 + t && x < 0.0) v += 1.0;
    if (x >= 0.0 && x < t / 2) v += 2.0;
    if (x >= t / 2 && x < 1.0 + t / 2) v += 1.0;
    return v;
  }
  double v = 0.0;
  if (x >= (t - 1.0) / 2 && x < t / 2) v += 2.0;
  if (x >= t / 2 && x <= 1.0 + t / 2) v += 1.0;
  return v;
}

double test1_exact_u(double t, double x) {
  if (t <= 1.0) {
    if (x < -1.0 + t) return 0.0;
    if (x < 0.0) return x + 1.0 - t;
    if (x < t / 2) return 2.0 * x + 1.0 - t;
    if (x < 1.0 + t / 2) return x - t / 2 + 1.0;
    return 2.0;
  }
  if (x < (t - 1.0) / 2) return 0.0;
  if (x < t / 2) return 2.0 * x + 1.0 - t;
  if (x < 1.0 + t / 2) return x - t / 2 + 1.0;
  return 2.0;
}

double test1_terminal(double x) { return test1_exact_u(2.0, x); }

Cdf1d test1_exact_cdf(double t) {
  // f(t, .) is piecewise constant; list its breakpoints in order.
  std::vector<double> breaks, heights;
  if (t <= 1.0) {
    breaks = {-1.0 + t, 0.0, t / 2, 1.0 + t / 2};
    heights = {1.0, 2.0, 1.0};
    if (breaks[0] == breaks[1]) {  // t == 1 collapses the first cell
      breaks.erase(breaks.begin());
      heights.erase(heights.begin());
    }
  } else {
    breaks = {(t - 1.0) / 2, t / 2, 1.0 + t / 2};
    heights = {2.0, 1.0};
  }
  return Cdf1d::from_step_density(breaks, heights);
}

namespace {

double margin_floor_for(const ProblemFields& pf) {
  return pf.grid.T * pf.drift.c0 + 5.0 * std::sqrt(pf.grid.T) * pf.diffusion.c2 +
         pf.mollifier.radius * pf.h();
}

TimeGrid grid_from(double T, double h) {
  const int N = std::max(1, static_cast<int>(std::lround(T / h)));
  return TimeGrid(T, N);
}

}  // namespace

double coupled_h(CouplingRule rule, double dx, double fixed_h) {
  switch (rule) {
    case CouplingRule::Fixed:
      return fixed_h;
    case CouplingRule::DxOverHToZero:
      return 0.814 * std::pow(dx, 2.0 / 3.0);
    case CouplingRule::Dx2OverHBounded:
      return 3.0 * dx;
  }
  return fixed_h;
}

BuiltinProblem builtin_problem(const std::string& id) {
  BuiltinProblem p;
  p.id = id;
  if (id == "test1") {
    p.fields.dim = 1;
    p.fields.drift.eval = [](double, const Vec& x) { return Vec(x.x < 0.0 ? -1.0 : -0.5); };
    p.fields.drift.c0 = 1.0;
    p.fields.drift.c1 = 0.0;
    p.fields.drift.time_dependent = false;
    p.fields.diffusion.column = [](double, const Vec&, int) { return Vec(); };
    p.fields.diffusion.r = 1;
    p.fields.diffusion.c2 = 0.0;
    p.fields.diffusion.time_dependent = false;
    p.fields.mollifier = MollifierSpec::defaults(1);
    p.fields.grid = grid_from(2.0, 0.06);
    p.dx = 0.02;
    p.domain = {{-5.0}, {5.0}};
    p.terminal = [](const Vec& x) { return test1_terminal(x.x); };
    p.initial = SourceMeasure::box_indicator({{-1.0}, {1.0}}, 1.0);
    p.roi = {{-2.0}, {3.0}};
    p.policy = EscapePolicy::ClampToHull;
  } else if (id == "test2") {
    p.fields.dim = 2;
    p.fields.drift.eval = [](double, const Vec& x) {
      const double f = std::max(2.0 - std::max(std::fabs(x.x), std::fabs(x.y)), 0.0);
      return Vec(-f * x.y, f * x.x);
    };
    p.fields.drift.c0 = std::sqrt(2.0);
    p.fields.drift.c1 = 8.0;  // Lipschitz bound over the enlarged domain
    p.fields.drift.time_dependent = false;
    p.fields.diffusion.column = [](double, const Vec&, int col) {
      return col == 0 ? Vec(1e-3, 0.0) : Vec(0.0, 1e-3);
    };
    p.fields.diffusion.r = 2;
    p.fields.diffusion.c2 = 1e-3 * std::sqrt(2.0);
    p.fields.diffusion.time_dependent = false;
    p.fields.mollifier = MollifierSpec::defaults(2);
    p.dx = 0.08;
    p.fields.grid = grid_from(1.5, 2.0 * p.dx);
    p.terminal = [](const Vec& x) {
      return std::sqrt((x.x - 1.0) * (x.x - 1.0) + x.y * x.y);
    };
    p.initial = SourceMeasure::box_indicator({{-1.5, -0.25}, {-0.1, 0.25}}, 1.0);
    p.margin_floor = margin_floor_for(p.fields);
    p.domain = Box{{-2.0, -2.0}, {2.0, 2.0}}.expanded(p.margin_floor);
    p.roi = {{-2.0, -2.0}, {2.0, 2.0}};
    p.policy = EscapePolicy::ClampToHull;
  } else if (id == "test3") {
    p.fields.dim = 2;
    p.fields.drift.eval = [](double t, const Vec& x) {
      return Vec(x.x < t ? -1.5 : -0.5, 0.0);
    };
    p.fields.drift.c0 = 1.5;
    p.fields.drift.c1 = 0.0;
    p.fields.drift.time_dependent = true;
    p.fields.diffusion.column = [](double, const Vec& x, int col) {
      const double s = 0.1 * std::fabs(std::cos(M_PI * x.x) * std::cos(M_PI * x.y));
      return col == 0 ? Vec(s, 0.0) : Vec(0.0, s);
    };
    p.fields.diffusion.r = 2;
    p.fields.diffusion.c2 = 0.1 * std::sqrt(2.0);
    p.fields.diffusion.time_dependent = false;
    p.fields.mollifier = MollifierSpec::defaults(2);
    p.fields.time_points = 8;  // drift switches inside a step; average in time
    p.fields.grid = grid_from(0.8, 0.02);
    p.dx = 0.01;
    p.domain = {{-4.0, -4.0}, {4.0, 4.0}};
    p.terminal = [](const Vec& x) {
      return std::sqrt((x.x - 0.8) * (x.x - 0.8) + x.y * x.y);
    };
    p.initial = SourceMeasure::box_indicator({{-1.0, -0.5}, {1.0, 0.5}}, 1.0);
    p.roi = {{-2.0, -2.0}, {2.0, 2.0}};
    p.policy = EscapePolicy::ClampToHull;
  } else {
    throw ConfigError("unknown builtin problem id: " + id);
  }
  if (p.margin_floor == 0.0) p.margin_floor = margin_floor_for(p.fields);
  return p;
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_num(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for '" + key + "': " + v);
  }
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_num(key, trim(item)));
  return out;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string ExperimentConfig::schema() {
  return "mode          transport|conservative|ladder|check\n"
         "test          test1|test2|test3\n"
         "node_file     Triangle .node path (2-D import; pairs with ele_file)\n"
         "ele_file      Triangle .ele path\n"
         "drift_csv     CSV t,x[,y],bx[,by]; replaces the drift (nearest sample)\n"
         "dx            target simplex diameter (0 = problem default)\n"
         "h             time step (0 = coupling rule / problem default)\n"
         "coupling      fixed|dx_over_h_to_zero|dx2_over_h_bounded\n"
         "T             final time (0 = problem default)\n"
         "ladder_dx     comma list of diameters for ladder mode\n"
         "ladder_target conservative|transport|both\n"
         "sigma_scale   multiplier on the diffusion factor\n"
         "roi           comma box: x0,x1 (1-D) or x0,y0,x1,y1 (2-D)\n"
         "margin        enlargement width; must be >= T*C0 + 5*sqrt(T)*C2 + radius*h\n"
         "mollifier     gaussian|bump\n"
         "moll_radius   truncation radius in units of h\n"
         "moll_nodes    quadrature points per axis = 2*moll_nodes + 1\n"
         "time_points   composite-midpoint nodes for the in-step time average\n"
         "seed          RNG seed (nonnegative integer)\n"
         "out           output directory\n"
         "snapshots     number of time slices written\n"
         "duality_tests number of random test functions for the duality report\n"
         "oslc_pairs    sample pairs for check mode\n"
         "dump_mesh     1 writes vertices.csv / simplices.csv\n"
         "dump_rows     step index whose transition rows are dumped (-1 = none)\n";
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (key == "mode") {
      c.mode = val;
    } else if (key == "test") {
      c.test = val;
    } else if (key == "node_file") {
      c.node_file = val;
    } else if (key == "ele_file") {
      c.ele_file = val;
    } else if (key == "drift_csv") {
      c.drift_csv = val;
    } else if (key == "dx") {
      c.dx = to_num(key, val);
    } else if (key == "h") {
      c.h = to_num(key, val);
    } else if (key == "coupling") {
      if (val == "fixed")
        c.coupling = CouplingRule::Fixed;
      else if (val == "dx_over_h_to_zero")
        c.coupling = CouplingRule::DxOverHToZero;
      else if (val == "dx2_over_h_bounded")
        c.coupling = CouplingRule::Dx2OverHBounded;
      else
        throw ConfigError("unknown coupling rule: " + val);
    } else if (key == "T") {
      c.T = to_num(key, val);
    } else if (key == "ladder_dx") {
      c.ladder_dx = to_list(key, val);
    } else if (key == "ladder_target") {
      if (val != "conservative" && val != "transport" && val != "both")
        throw ConfigError("unknown ladder_target: " + val);
      c.ladder_target = val;
    } else if (key == "sigma_scale") {
      c.sigma_scale = to_num(key, val);
    } else if (key == "roi") {
      const auto v = to_list(key, val);
      if (v.size() == 2)
        c.roi = Box{{v[0]}, {v[1]}};
      else if (v.size() == 4)
        c.roi = Box{{v[0], v[1]}, {v[2], v[3]}};
      else
        throw ConfigError("roi needs 2 (1-D) or 4 (2-D) numbers");
    } else if (key == "margin") {
      c.margin = to_num(key, val);
    } else if (key == "mollifier") {
      if (val == "gaussian")
        c.moll_profile = MollifierSpec::Profile::Gaussian;
      else if (val == "bump")
        c.moll_profile = MollifierSpec::Profile::Bump;
      else
        throw ConfigError("unknown mollifier profile: " + val);
      c.moll_set = true;
    } else if (key == "moll_radius") {
      c.moll_radius = to_num(key, val);
    } else if (key == "moll_nodes") {
      c.moll_nodes = static_cast<int>(to_num(key, val));
    } else if (key == "time_points") {
      c.time_points = static_cast<int>(to_num(key, val));
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(to_num(key, val));
    } else if (key == "out") {
      c.out_dir = val;
    } else if (key == "snapshots") {
      c.snapshots = static_cast<int>(to_num(key, val));
    } else if (key == "duality_tests") {
      c.duality_tests = static_cast<int>(to_num(key, val));
    } else if (key == "oslc_pairs") {
      c.oslc_pairs = static_cast<int>(to_num(key, val));
    } else if (key == "dump_mesh") {
      c.dump_mesh = to_num(key, val) != 0.0;
    } else if (key == "dump_rows") {
      c.dump_rows = static_cast<int>(to_num(key, val));
    } else {
      throw ConfigError("unknown config key '" + key + "' (line " + std::to_string(lineno) + ")");
    }
  }
  if (c.mode != "transport" && c.mode != "conservative" && c.mode != "ladder" &&
      c.mode != "check")
    throw ConfigError("unknown mode: " + c.mode);
  return c;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ExperimentConfig::echo() const {
  std::ostringstream out;
  out << "mode = " << mode << "\n";
  out << "test = " << test << "\n";
  if (!node_file.empty()) out << "node_file = " << node_file << "\n";
  if (!ele_file.empty()) out << "ele_file = " << ele_file << "\n";
  if (!drift_csv.empty()) out << "drift_csv = " << drift_csv << "\n";
  out << "dx = " << fmt(dx) << "\n";
  out << "h = " << fmt(h) << "\n";
  out << "coupling = "
      << (coupling == CouplingRule::Fixed
              ? "fixed"
              : coupling == CouplingRule::DxOverHToZero ? "dx_over_h_to_zero"
                                                        : "dx2_over_h_bounded")
      << "\n";
  out << "T = " << fmt(T) << "\n";
  if (!ladder_dx.empty()) {
    out << "ladder_dx = ";
    for (size_t i = 0; i < ladder_dx.size(); ++i)
      out << (i ? "," : "") << fmt(ladder_dx[i]);
    out << "\n";
    out << "ladder_target = " << ladder_target << "\n";
  }
  out << "sigma_scale = " << fmt(sigma_scale) << "\n";
  if (roi) {
    out << "roi = " << fmt(roi->lo.x) << "," << fmt(roi->lo.y) << "," << fmt(roi->hi.x) << ","
        << fmt(roi->hi.y) << "\n";
  }
  out << "margin = " << fmt(margin) << "\n";
  if (moll_set)
    out << "mollifier = "
        << (moll_profile == MollifierSpec::Profile::Gaussian ? "gaussian" : "bump") << "\n";
  if (moll_radius > 0) out << "moll_radius = " << fmt(moll_radius) << "\n";
  if (moll_nodes > 0) out << "moll_nodes = " << moll_nodes << "\n";
  if (time_points > 0) out << "time_points = " << time_points << "\n";
  out << "seed = " << seed << "\n";
  out << "out = " << out_dir << "\n";
  out << "snapshots = " << snapshots << "\n";
  out << "duality_tests = " << duality_tests << "\n";
  out << "oslc_pairs = " << oslc_pairs << "\n";
  if (dump_mesh) out << "dump_mesh = 1\n";
  if (dump_rows >= 0) out << "dump_rows = " << dump_rows << "\n";
  return out.str();
}

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

double simplex_volume(const Mesh& mesh, int s) {
  const auto& sx = mesh.simplex(s);
  const Vec& a = mesh.vertex(sx[0]);
  const Vec& b = mesh.vertex(sx[1]);
  if (mesh.dim() == 1) return std::fabs(b.x - a.x);
  const Vec& c = mesh.vertex(sx[2]);
  return 0.5 * std::fabs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

std::vector<double> lumped_areas(const Mesh& mesh) {
  std::vector<double> area(mesh.vertex_count(), 0.0);
  const double share = 1.0 / (mesh.dim() + 1);
  for (int s = 0; s < mesh.simplex_count(); ++s) {
    const double v = simplex_volume(mesh, s) * share;
    const auto& sx = mesh.simplex(s);
    for (int l = 0; l <= mesh.dim(); ++l) area[sx[l]] += v;
  }
  return area;
}

// The problem with all config overrides applied plus the mesh to run on.
struct PreparedRun {
  BuiltinProblem problem;
  Mesh mesh;
};

BuiltinProblem apply_overrides(const ExperimentConfig& cfg, double dx_override) {
  BuiltinProblem p = builtin_problem(cfg.test);
  if (!cfg.drift_csv.empty()) {
    std::ifstream in(cfg.drift_csv);
    if (!in) throw ConfigError("cannot open drift_csv: " + cfg.drift_csv);
    std::stringstream buf;
    buf << in.rdbuf();
    p.fields.drift = tabulated_drift(buf.str(), p.fields.dim);
  }
  if (dx_override > 0) p.dx = dx_override;
  const double T = cfg.T > 0 ? cfg.T : p.fields.grid.T;
  double h = p.fields.grid.h();
  if (cfg.coupling != CouplingRule::Fixed)
    h = coupled_h(cfg.coupling, p.dx, h);
  else if (cfg.h > 0)
    h = cfg.h;
  else if (cfg.test == "test2" && dx_override > 0)
    h = 2.0 * p.dx;  // keep the documented pairing when only dx moves
  p.fields.grid = grid_from(T, h);
  if (cfg.sigma_scale != 1.0) {
    auto base = p.fields.diffusion.column;
    const double s = cfg.sigma_scale;
    p.fields.diffusion.column = [base, s](double t, const Vec& x, int col) {
      return base(t, x, col) * s;
    };
    p.fields.diffusion.c2 *= std::fabs(s);
  }
  if (cfg.moll_set) p.fields.mollifier.profile = cfg.moll_profile;
  if (cfg.moll_profile == MollifierSpec::Profile::Bump && cfg.moll_set)
    p.fields.mollifier.radius = 1.0;
  if (cfg.moll_radius > 0) p.fields.mollifier.radius = cfg.moll_radius;
  if (cfg.moll_nodes > 0) p.fields.mollifier.nodes = cfg.moll_nodes;
  if (cfg.time_points > 0) p.fields.time_points = cfg.time_points;
  if (cfg.roi) p.roi = *cfg.roi;
  p.margin_floor = margin_floor_for(p.fields);
  if (cfg.margin >= 0 && cfg.margin < p.margin_floor)
    throw ConfigError("margin " + fmt(cfg.margin) + " is below the invariant floor " +
                      fmt(p.margin_floor));
  if (cfg.test == "test2") {
    const double m = cfg.margin >= 0 ? cfg.margin : p.margin_floor;
    p.domain = Box{{-2.0, -2.0}, {2.0, 2.0}}.expanded(m);
  }
  return p;
}

Mesh make_mesh(const ExperimentConfig& cfg, const BuiltinProblem& p) {
  if (!cfg.node_file.empty() || !cfg.ele_file.empty()) {
    if (cfg.node_file.empty() || cfg.ele_file.empty())
      throw ConfigError("node_file and ele_file must be given together");
    if (p.fields.dim != 2) throw ConfigError("Triangle import is 2-D only");
    return import_triangle_files(cfg.node_file, cfg.ele_file);
  }
  if (p.fields.dim == 1) {
    const int n = std::max(1, static_cast<int>(std::ceil((p.domain.hi.x - p.domain.lo.x) / p.dx)));
    return build_interval_mesh(p.domain.lo.x, p.domain.hi.x, n);
  }
  return build_box_mesh_diameter(p.domain, p.dx);
}

std::string csv_point(const Mesh& mesh, int i) {
  const Vec& v = mesh.vertex(i);
  std::string s = std::to_string(i) + "," + fmt(v.x);
  if (mesh.dim() == 2) s += "," + fmt(v.y);
  return s;
}

// Value snapshots restricted to the RoI window keep big-mesh runs writable.
void write_value_snapshot(const fs::path& path, const Mesh& mesh, const std::vector<double>& u,
                          const Box& roi) {
  std::ostringstream out;
  out << (mesh.dim() == 1 ? "id,x,u\n" : "id,x,y,u\n");
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    if (!roi.contains(mesh.vertex(i), mesh.dim())) continue;
    out << csv_point(mesh, i) << "," << fmt(u[i]) << "\n";
  }
  write_file(path, out.str());
}

void write_measure_snapshot(const fs::path& path, const DiscreteMeasure& f,
                            const std::vector<double>& area) {
  const Mesh& mesh = *f.mesh;
  std::ostringstream out;
  out << (mesh.dim() == 1 ? "id,x,weight,density\n" : "id,x,y,weight,density\n");
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    if (f.w[i] == 0.0) continue;
    out << csv_point(mesh, i) << "," << fmt(f.w[i]) << "," << fmt(f.w[i] / area[i]) << "\n";
  }
  write_file(path, out.str());
}

std::string snapshot_name(const char* prefix, int idx, double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%02d_t%.6f.csv", prefix, idx, t);
  return buf;
}

struct RunReport {
  bool invariants_ok = true;
  std::ostringstream summary;
};

void run_transport(const ExperimentConfig& cfg, const PreparedRun& run, const fs::path& out,
                   RunReport& rep) {
  const BuiltinProblem& p = run.problem;
  CoefficientTable coeffs(p.fields, run.mesh);
  TransportSolution sol = solve_backward(run.mesh, coeffs, p.fields.grid, p.terminal, p.policy);
  const int N = p.fields.grid.N;
  const int S = std::max(1, cfg.snapshots);
  for (int m = 0; m < S; ++m) {
    const double t = S == 1 ? p.fields.grid.T : p.fields.grid.T * m / (S - 1);
    const int k = static_cast<int>(std::lround(t / p.fields.grid.h()));
    write_value_snapshot(out / snapshot_name("u", m, p.fields.grid.t(k)), run.mesh, sol.u[k],
                         p.roi);
  }
  // Max principle against the terminal range (rows are stochastic).
  double tmin = sol.u[N][0], tmax = sol.u[N][0];
  for (double v : sol.u[N]) {
    tmin = std::min(tmin, v);
    tmax = std::max(tmax, v);
  }
  double umin = tmin, umax = tmax;
  for (int k = 0; k < N; ++k)
    for (double v : sol.u[k]) {
      umin = std::min(umin, v);
      umax = std::max(umax, v);
    }
  const double slack = 1e-12 * (1.0 + tmax - tmin);
  const bool max_principle = umin >= tmin - slack && umax <= tmax + slack;
  rep.summary << "terminal range: [" << fmt(tmin) << ", " << fmt(tmax) << "]\n";
  rep.summary << "solution range: [" << fmt(umin) << ", " << fmt(umax) << "]\n";
  rep.summary << "max principle: " << (max_principle ? "pass" : "FAIL") << "\n";
  if (!max_principle) rep.invariants_ok = false;
  if (cfg.test == "test1") {
    GridFunction u0(run.mesh, sol.u[0]);
    const double err =
        linf_gap(u0, [](const Vec& x) { return test1_exact_u(0.0, x.x); }, p.roi);
    rep.summary << "Linf error vs exact at t=0 (RoI): " << fmt(err) << "\n";
  }
  if (cfg.dump_rows >= 0 && cfg.dump_rows <= N - 1)
    dump_transition_rows(run.mesh, coeffs, cfg.dump_rows, (out / "rows.csv").string(), p.policy);
}

void run_conservative(const ExperimentConfig& cfg, const PreparedRun& run, const fs::path& out,
                      RunReport& rep) {
  const BuiltinProblem& p = run.problem;
  CoefficientTable coeffs(p.fields, run.mesh);
  ClampLedger ledger;
  MeasurePath path = solve_forward(run.mesh, coeffs, p.fields.grid, p.initial, p.policy, &ledger);
  const int N = p.fields.grid.N;
  const auto area = lumped_areas(run.mesh);
  const int S = std::max(1, cfg.snapshots);
  for (int m = 0; m < S; ++m) {
    const double t = S == 1 ? p.fields.grid.T : p.fields.grid.T * m / (S - 1);
    const int k = static_cast<int>(std::lround(t / p.fields.grid.h()));
    write_measure_snapshot(out / snapshot_name("f", m, p.fields.grid.t(k)), path.steps[k], area);
  }
  const double mass0 = path.steps[0].mass();
  double drift = 0.0, wmin = 0.0;
  for (int k = 0; k <= N; ++k) {
    drift = std::max(drift, std::fabs(path.steps[k].mass() - mass0));
    for (double w : path.steps[k].w) wmin = std::min(wmin, w);
  }
  rep.summary << "initial mass: " << fmt(mass0) << "\n";
  rep.summary << "max mass drift: " << fmt(drift) << "\n";
  rep.summary << "min weight: " << fmt(wmin) << "\n";
  rep.summary << "clamped rows: " << ledger.clamped_rows << "\n";
  rep.summary << "clamped row mass: " << fmt(ledger.clamped_row_mass) << "\n";
  rep.summary << "negative round-off zeroed: " << fmt(ledger.clamped_negative) << "\n";
  if (drift > 1e-12 || wmin < 0.0) {
    rep.invariants_ok = false;
    rep.summary << "conservativity: FAIL\n";
  } else {
    rep.summary << "conservativity: pass\n";
  }
  // Duality report: random bounded test functions against the backward scheme.
  if (cfg.duality_tests > 0) {
    CounterRng rng(cfg.seed, 0x9dULL);
    std::vector<GridFunction> gs;
    for (int q = 0; q < cfg.duality_tests; ++q) {
      GridFunction g(run.mesh, 0.0);
      CounterRng gr = rng.split(static_cast<std::uint64_t>(q));
      for (auto& v : g.values) v = 2.0 * gr.next_double() - 1.0;
      gs.push_back(std::move(g));
    }
    const auto gaps = duality_gaps(run.mesh, coeffs, p.fields.grid, p.initial, gs, N, p.policy);
    double worst = 0.0;
    for (double gp : gaps) worst = std::max(worst, gp);
    rep.summary << "duality tests: " << cfg.duality_tests << "\n";
    rep.summary << "max duality gap: " << fmt(worst) << "\n";
    if (worst > 1e-10) {
      rep.invariants_ok = false;
      rep.summary << "duality: FAIL\n";
    } else {
      rep.summary << "duality: pass\n";
    }
  }
  if (cfg.test == "test1") {
    const double w1 = wasserstein1_1d(path.steps[N], test1_exact_cdf(p.fields.grid.T));
    rep.summary << "W1 error vs exact at t=T: " << fmt(w1) << "\n";
  }
}

void run_ladder(const ExperimentConfig& cfg, const fs::path& out, RunReport& rep) {
  if (cfg.test != "test1")
    throw ConfigError("ladder mode needs the problem with exact solutions (test1)");
  if (cfg.ladder_dx.size() < 2) throw ConfigError("ladder_dx needs at least two diameters");
  std::vector<double> dxs = cfg.ladder_dx;
  std::sort(dxs.begin(), dxs.end(), std::greater<>());

  const bool do_cons = cfg.ladder_target != "transport";
  const bool do_trans = cfg.ladder_target != "conservative";
  ConvergenceTable cons_table, trans_table;
  cons_table.with_linf = false;
  trans_table.with_w1 = false;
  for (double dx : dxs) {
    if (do_cons) {
      ExperimentConfig sub = cfg;
      sub.coupling = CouplingRule::Dx2OverHBounded;
      BuiltinProblem p = apply_overrides(sub, dx);
      Mesh mesh = make_mesh(sub, p);
      CoefficientTable coeffs(p.fields, mesh);
      MeasurePath path = solve_forward(mesh, coeffs, p.fields.grid, p.initial, p.policy);
      ConvergenceRow row;
      row.dx = dx;
      row.h = p.fields.grid.h();
      row.error_w1 =
          wasserstein1_1d(path.steps[p.fields.grid.N], test1_exact_cdf(p.fields.grid.T));
      cons_table.rows.push_back(row);
    }
    if (do_trans) {
      ExperimentConfig sub = cfg;
      sub.coupling = CouplingRule::DxOverHToZero;
      BuiltinProblem p = apply_overrides(sub, dx);
      Mesh mesh = make_mesh(sub, p);
      CoefficientTable coeffs(p.fields, mesh);
      TransportSolution sol = solve_backward(mesh, coeffs, p.fields.grid, p.terminal, p.policy);
      ConvergenceRow row;
      row.dx = dx;
      row.h = p.fields.grid.h();
      GridFunction u0(mesh, sol.u[0]);
      row.error_linf =
          linf_gap(u0, [](const Vec& x) { return test1_exact_u(0.0, x.x); }, p.roi);
      trans_table.rows.push_back(row);
    }
  }
  auto check_table = [&](const ConvergenceTable& t, double ConvergenceRow::*field,
                         const char* name) {
    write_file(out / (std::string(name) + "_convergence.csv"), t.to_csv());
    write_file(out / (std::string(name) + "_convergence.txt"), t.to_text());
    rep.summary << name << " ladder:\n" << t.to_text();
    bool decreasing = true;
    for (size_t i = 0; i + 1 < t.rows.size(); ++i)
      if (!(t.rows[i + 1].*field < t.rows[i].*field)) decreasing = false;
    const auto orders = observed_orders(t, field);
    bool positive = true;
    for (double o : orders)
      if (!(o > 0.0)) positive = false;
    rep.summary << name << " errors decreasing: " << (decreasing ? "pass" : "FAIL") << "\n";
    rep.summary << name << " orders positive: " << (positive ? "pass" : "FAIL") << "\n";
    if (!decreasing || !positive) rep.invariants_ok = false;
  };
  if (do_cons) check_table(cons_table, &ConvergenceRow::error_w1, "conservative");
  if (do_trans) check_table(trans_table, &ConvergenceRow::error_linf, "transport");
}

void run_check(const ExperimentConfig& cfg, const PreparedRun& run, RunReport& rep) {
  const BuiltinProblem& p = run.problem;
  const OslcReport r = check_oslc(p.fields.drift, p.fields.grid, p.domain, p.fields.dim,
                                  cfg.oslc_pairs, cfg.seed, p.fields.drift.c1);
  rep.summary << "declared one-sided Lipschitz constant: " << fmt(p.fields.drift.c1) << "\n";
  rep.summary << "empirical estimate: " << fmt(r.estimate) << "\n";
  rep.summary << "sample pairs: " << r.samples_used << "\n";
  rep.summary << "check: " << (r.pass ? "pass" : "FAIL") << "\n";
  if (!r.pass) rep.invariants_ok = false;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult res;
  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  try {
    const fs::path out(cfg.out_dir);
    fs::create_directories(out);
    if (cfg.mode == "ladder") {
      ExperimentConfig echo_cfg = cfg;  // validate the base overrides up front
      apply_overrides(echo_cfg, cfg.ladder_dx.empty() ? 0.0 : cfg.ladder_dx.front());
      write_file(out / "config_echo.txt", cfg.echo());
      run_ladder(cfg, out, rep);
    } else {
      PreparedRun run{apply_overrides(cfg, cfg.dx), Mesh(1, {{0.0}, {1.0}}, {{{0, 1, -1}}})};
      run.mesh = make_mesh(cfg, run.problem);
      write_file(out / "config_echo.txt", cfg.echo());
      rep.summary << "test: " << cfg.test << "\n";
      rep.summary << "mesh: " << run.mesh.vertex_count() << " vertices, "
                  << run.mesh.simplex_count() << " simplices, dx = " << fmt(run.mesh.dx())
                  << "\n";
      rep.summary << "time grid: T = " << fmt(run.problem.fields.grid.T)
                  << ", N = " << run.problem.fields.grid.N
                  << ", h = " << fmt(run.problem.fields.grid.h()) << "\n";
      rep.summary << "margin floor: " << fmt(run.problem.margin_floor) << "\n";
      if (cfg.dump_mesh)
        export_mesh_csv(run.mesh, (out / "vertices.csv").string(),
                        (out / "simplices.csv").string());
      if (cfg.mode == "transport")
        run_transport(cfg, run, out, rep);
      else if (cfg.mode == "conservative")
        run_conservative(cfg, run, out, rep);
      else
        run_check(cfg, run, rep);
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char buf[64];
    std::snprintf(buf, sizeof buf, "wall clock: %.3f s\n", secs);
    rep.summary << buf;
    rep.summary << "result: " << (rep.invariants_ok ? "pass" : "invariant failure") << "\n";
    res.exit_code = rep.invariants_ok ? 0 : 2;
    res.summary = rep.summary.str();
    write_file(fs::path(cfg.out_dir) / "summary.txt", res.summary);
  } catch (const ConfigError& e) {
    res.exit_code = 4;
    res.summary = std::string("config error: ") + e.what() + "\n";
  } catch (const std::exception& e) {
    res.exit_code = 3;
    res.summary = std::string("solver error: ") + e.what() + "\n";
  }
  return res;
}

}  // namespace oslc
