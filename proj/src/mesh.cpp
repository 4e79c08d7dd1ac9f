#include "oslc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oslc {

namespace {

constexpr double kVolumeFloor = 1e-14;

double simplex_diameter(int dim, const Vec& a, const Vec& b, const Vec& c) {
  if (dim == 1) return std::fabs(b.x - a.x);
  return std::max({(b - a).norm(), (c - a).norm(), (c - b).norm()});
}

}  // namespace

Mesh::Mesh(int dim, std::vector<Vec> vertices, std::vector<std::array<int, 3>> simplices)
    : dim_(dim), vertices_(std::move(vertices)), simplices_(std::move(simplices)) {
  if (dim_ != 1 && dim_ != 2) throw MeshError("mesh dimension must be 1 or 2");
  if (vertices_.empty() || simplices_.empty()) throw MeshError("empty mesh");

  bbox_.lo = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  bbox_.hi = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Vec& v : vertices_) {
    bbox_.lo.x = std::min(bbox_.lo.x, v.x);
    bbox_.lo.y = std::min(bbox_.lo.y, v.y);
    bbox_.hi.x = std::max(bbox_.hi.x, v.x);
    bbox_.hi.y = std::max(bbox_.hi.y, v.y);
  }
  if (dim_ == 1) bbox_.lo.y = bbox_.hi.y = 0.0;

  inv_.resize(simplices_.size());
  const int nv = vertex_count();
  for (int s = 0; s < simplex_count(); ++s) {
    const auto& sp = simplices_[s];
    const int need = dim_ + 1;
    for (int m = 0; m < need; ++m) {
      if (sp[m] < 0 || sp[m] >= nv)
        throw MeshError("simplex " + std::to_string(s) + " references invalid vertex id " +
                        std::to_string(sp[m]));
    }
    const Vec& a = vertices_[sp[0]];
    const Vec& b = vertices_[sp[1]];
    if (dim_ == 1) {
      const double len = b.x - a.x;
      if (std::fabs(len) < kVolumeFloor)
        throw MeshError("degenerate segment " + std::to_string(s));
      inv_[s] = {1.0 / len, 0, 0, 0};
      dx_ = std::max(dx_, std::fabs(len));
    } else {
      const Vec& c = vertices_[sp[2]];
      const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
      if (std::fabs(det) < kVolumeFloor)
        throw MeshError("degenerate triangle " + std::to_string(s));
      // Rows of the inverse edge matrix, used to map point offsets to (l2, l3).
      inv_[s] = {(c.y - a.y) / det, -(c.x - a.x) / det, -(b.y - a.y) / det, (b.x - a.x) / det};
      dx_ = std::max(dx_, simplex_diameter(2, a, b, c));
    }
  }
  tol_loc_ = 1e-10 * (1.0 + dx_);
  build_index();
}

void Mesh::build_index() {
  const double wx = std::max(bbox_.hi.x - bbox_.lo.x, 1e-300);
  const double wy = std::max(bbox_.hi.y - bbox_.lo.y, 1e-300);
  if (dim_ == 1) {
    nbx_ = std::max(1, simplex_count());
    nby_ = 1;
  } else {
    const int n = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(simplex_count()))));
    nbx_ = n;
    nby_ = n;
  }
  binw_x_ = wx / nbx_;
  binw_y_ = wy / nby_;
  bins_.assign(static_cast<size_t>(nbx_) * nby_, {});

  auto bin_range = [&](double lo, double hi, double base, double w, int nb, int& b0, int& b1) {
    b0 = std::clamp(static_cast<int>((lo - base) / w), 0, nb - 1);
    b1 = std::clamp(static_cast<int>((hi - base) / w), 0, nb - 1);
  };
  for (int s = 0; s < simplex_count(); ++s) {
    const auto& sp = simplices_[s];
    double lx = vertices_[sp[0]].x, hx = lx, ly = vertices_[sp[0]].y, hy = ly;
    for (int m = 1; m <= dim_; ++m) {
      lx = std::min(lx, vertices_[sp[m]].x);
      hx = std::max(hx, vertices_[sp[m]].x);
      ly = std::min(ly, vertices_[sp[m]].y);
      hy = std::max(hy, vertices_[sp[m]].y);
    }
    int bx0, bx1, by0 = 0, by1 = 0;
    bin_range(lx, hx, bbox_.lo.x, binw_x_, nbx_, bx0, bx1);
    if (dim_ == 2) bin_range(ly, hy, bbox_.lo.y, binw_y_, nby_, by0, by1);
    for (int by = by0; by <= by1; ++by)
      for (int bx = bx0; bx <= bx1; ++bx)
        bins_[static_cast<size_t>(by) * nbx_ + bx].push_back(s);
  }
}

std::array<double, 3> Mesh::barycentric_coords(int s, const Vec& point) const {
  const auto& sp = simplices_[s];
  const Vec& a = vertices_[sp[0]];
  if (dim_ == 1) {
    const double l2 = (point.x - a.x) * inv_[s][0];
    return {1.0 - l2, l2, 0.0};
  }
  const Vec d = point - a;
  const double l2 = inv_[s][0] * d.x + inv_[s][1] * d.y;
  const double l3 = inv_[s][2] * d.x + inv_[s][3] * d.y;
  return {1.0 - l2 - l3, l2, l3};
}

std::optional<int> Mesh::locate(const Vec& point) const {
  if (point.x < bbox_.lo.x - tol_loc_ || point.x > bbox_.hi.x + tol_loc_) return std::nullopt;
  if (dim_ == 2 && (point.y < bbox_.lo.y - tol_loc_ || point.y > bbox_.hi.y + tol_loc_))
    return std::nullopt;
  const int bx = std::clamp(static_cast<int>((point.x - bbox_.lo.x) / binw_x_), 0, nbx_ - 1);
  const int by =
      dim_ == 2 ? std::clamp(static_cast<int>((point.y - bbox_.lo.y) / binw_y_), 0, nby_ - 1) : 0;
  const auto& cand = bins_[static_cast<size_t>(by) * nbx_ + bx];
  for (int s : cand) {  // ids ascend; first hit realizes the lowest-id tie-break
    const auto bc = barycentric_coords(s, point);
    if (bc[0] >= -tol_loc_ && bc[1] >= -tol_loc_ && bc[2] >= -tol_loc_) return s;
  }
  return std::nullopt;
}

GridFunction::GridFunction(const Mesh& m, std::vector<double> v)
    : mesh(&m), values(std::move(v)) {
  if (static_cast<int>(values.size()) != m.vertex_count())
    throw MeshError("GridFunction value count does not match vertex count");
}

GridFunction::GridFunction(const Mesh& m, double fill)
    : mesh(&m), values(static_cast<size_t>(m.vertex_count()), fill) {}

double interpolate(const GridFunction& f, const Vec& point) {
  const auto s = f.mesh->locate(point);
  if (!s) throw OutsideHullError(point);
  const auto bc = f.mesh->barycentric_coords(*s, point);
  const auto& sp = f.mesh->simplex(*s);
  double v = bc[0] * f.values[sp[0]] + bc[1] * f.values[sp[1]];
  if (f.mesh->dim() == 2) v += bc[2] * f.values[sp[2]];
  return v;
}

Mesh build_interval_mesh(double a, double b, int n) {
  if (n < 1) throw MeshError("build_interval_mesh: need at least one segment");
  if (!(a < b)) throw MeshError("build_interval_mesh: need a < b");
  std::vector<Vec> verts;
  verts.reserve(n + 1);
  for (int i = 0; i <= n; ++i) verts.emplace_back(a + (b - a) * i / n, 0.0);
  std::vector<std::array<int, 3>> simp;
  simp.reserve(n);
  for (int i = 0; i < n; ++i) simp.push_back({i, i + 1, -1});
  return Mesh(1, std::move(verts), std::move(simp));
}

namespace {

Mesh build_structured(const Box& box, double cell_side) {
  const double wx = box.hi.x - box.lo.x;
  const double wy = box.hi.y - box.lo.y;
  if (!(wx > 0) || !(wy > 0)) throw MeshError("build_box_mesh: empty box");
  const int nx = std::max(1, static_cast<int>(std::ceil(wx / cell_side)));
  const int ny = std::max(1, static_cast<int>(std::ceil(wy / cell_side)));
  std::vector<Vec> verts;
  verts.reserve(static_cast<size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      verts.emplace_back(box.lo.x + wx * i / nx, box.lo.y + wy * j / ny);
  std::vector<std::array<int, 3>> simp;
  simp.reserve(static_cast<size_t>(nx) * ny * 2);
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      simp.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      simp.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return Mesh(2, std::move(verts), std::move(simp));
}

}  // namespace

Mesh build_box_mesh(const Box& box, double target_area) {
  if (!(target_area > 0)) throw MeshError("build_box_mesh: target area must be positive");
  // Each square cell of side s splits into two triangles of area s^2/2.
  return build_structured(box, std::sqrt(2.0 * target_area));
}

Mesh build_box_mesh_diameter(const Box& box, double max_diameter) {
  if (!(max_diameter > 0)) throw MeshError("build_box_mesh: diameter must be positive");
  // Triangle diameter is the cell diagonal s*sqrt(2).
  return build_structured(box, max_diameter / std::sqrt(2.0));
}

}  // namespace oslc
