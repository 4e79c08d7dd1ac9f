#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "oslc/geometry.hpp"
#include "oslc/mesh.hpp"

namespace oslc {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Uniform time grid on [0, T] with N steps of size h = T/N.
struct TimeGrid {
  double T = 1.0;
  int N = 1;

  TimeGrid() = default;
  TimeGrid(double T_, int N_) : T(T_), N(N_) {
    if (N < 1 || !(T > 0)) throw ConfigError("time grid needs N >= 1 and T > 0");
  }
  double h() const { return T / N; }
  double t(int k) const { return T * k / N; }
};

// Drift b(t, x) with its declared sup bound and, optionally, the declared
// one-sided Lipschitz constant. Evaluation rules must be pure.
struct VelocityField {
  std::function<Vec(double, const Vec&)> eval;
  double c0 = 0.0;                  // sup |b|
  double c1 = -1.0;                 // declared OSLC constant, < 0 when undeclared
  bool time_dependent = true;
};

// Diffusion factor sigma(t, x), a d x r matrix addressed by column.
struct DiffusionField {
  std::function<Vec(double, const Vec&, int)> column;  // column index in [0, r)
  int r = 1;
  double c2 = 0.0;                  // sup |sigma|, also its Lipschitz bound
  bool time_dependent = true;
};

// Unit-mass kernel profile at scale h with tensor-product midpoint quadrature
// over the truncated support; weights are renormalized to unit mass.
struct MollifierSpec {
  enum class Profile { Gaussian, Bump };
  Profile profile = Profile::Gaussian;
  double radius = 6.0;  // truncation radius in multiples of h
  int nodes = 20;       // 2*nodes+1 quadrature points per axis

  static MollifierSpec defaults(int dim, Profile p = Profile::Gaussian) {
    MollifierSpec m;
    m.profile = p;
    if (p == Profile::Bump) m.radius = 1.0;
    m.nodes = dim == 1 ? 20 : 10;
    return m;
  }
};

// Kernel value at u (in units of h), before truncation renormalization.
double mollifier_profile(const MollifierSpec& spec, int dim, const Vec& u);

// |1 - sum of quadrature weights| before renormalization.
double mollifier_truncation_defect(const MollifierSpec& spec, int dim);

struct ProblemFields {
  int dim = 1;
  VelocityField drift;
  DiffusionField diffusion;
  MollifierSpec mollifier;
  TimeGrid grid;
  int time_points = 1;  // composite-midpoint nodes for the (1/h)∫ dt averages

  double h() const { return grid.h(); }
};

// b^k_h(x): mollified drift averaged over [t_k, t_{k+1}].
Vec mollified_drift(const ProblemFields& pf, int k, const Vec& x);

// sigma^k_{h,l}(x): time average of column l; sigma is not mollified.
Vec averaged_sigma(const ProblemFields& pf, int k, int col, const Vec& x);

// Mollified drift at a single time (no step average); used by the checker.
Vec mollified_drift_at(const ProblemFields& pf, double t, const Vec& x);

// b(t, x) identically equal to c.
VelocityField constant_drift(const Vec& c);

// Drift tabulated as CSV rows t,x[,y],bx[,by]; evaluation returns the value
// of the nearest sample in (t, x) space. c0 is the max tabulated |b|.
VelocityField tabulated_drift(const std::string& csv_text, int dim);

struct OslcReport {
  double estimate = 0.0;  // max over samples of -(b(x)-b(y)).(x-y)/|x-y|^2
  bool pass = false;      // estimate <= declared C1 + 1e-9
  int samples_used = 0;
};

// Empirical OSLC check over seeded random (t, x, y) triples in `sample_box`.
OslcReport check_oslc(const VelocityField& field, const TimeGrid& grid, const Box& sample_box,
                      int dim, int pairs, std::uint64_t seed, double declared_c1);

// Per-(step, vertex) cache of b^k_h and sigma^k_{h,l} at mesh vertices.
// Values are filled on demand; when both fields are time-independent the
// step-0 table is reused for every k. Not safe for concurrent mutation.
class CoefficientTable {
 public:
  CoefficientTable(const ProblemFields& pf, const Mesh& mesh);

  const ProblemFields& fields() const { return *pf_; }
  const Mesh& mesh() const { return *mesh_; }

  Vec drift(int k, int vertex);
  Vec sigma(int k, int col, int vertex);

  // Precompute all vertices for step k (one sequential pass).
  void ensure_step(int k);

 private:
  void ensure_vertex(int k, int vertex);
  int slot(int k);

  const ProblemFields* pf_;
  const Mesh* mesh_;
  bool static_coeffs_;
  int cached_k_ = -1;
  std::vector<char> ready_;
  std::vector<Vec> b_;
  std::vector<Vec> sig_;  // vertex-major, r columns each
};

}  // namespace oslc
