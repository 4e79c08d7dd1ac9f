#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oslc/geometry.hpp"

namespace oslc {

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown by interpolate() when the query point is not covered by the mesh.
struct OutsideHullError : MeshError {
  Vec point;
  explicit OutsideHullError(Vec p)
      : MeshError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                  ") is outside the mesh hull"),
        point(p) {}
};

// Unstructured simplicial mesh in dimension 1 or 2 with a uniform-bin point
// location index. Queries are read-only after construction.
class Mesh {
 public:
  // Simplices are (d+1)-tuples; in 1-D the third slot is -1.
  Mesh(int dim, std::vector<Vec> vertices, std::vector<std::array<int, 3>> simplices);

  int dim() const { return dim_; }
  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int simplex_count() const { return static_cast<int>(simplices_.size()); }
  const Vec& vertex(int i) const { return vertices_[i]; }
  const std::array<int, 3>& simplex(int s) const { return simplices_[s]; }
  const std::vector<Vec>& vertices() const { return vertices_; }

  // Max simplex diameter.
  double dx() const { return dx_; }
  const Box& bounding_box() const { return bbox_; }
  double locate_tolerance() const { return tol_loc_; }

  // Barycentric coordinates of `point` w.r.t. simplex `s`; coords sum to 1 and
  // may be negative outside the simplex.
  std::array<double, 3> barycentric_coords(int s, const Vec& point) const;

  // Simplex containing `point` (all barycentric coords >= -tol_loc), lowest id
  // on ties; nullopt when the point is outside the hull.
  std::optional<int> locate(const Vec& point) const;

 private:
  void build_index();

  int dim_;
  std::vector<Vec> vertices_;
  std::vector<std::array<int, 3>> simplices_;
  // Per-simplex affine inverse for barycentric evaluation.
  std::vector<std::array<double, 4>> inv_;
  double dx_ = 0.0;
  double tol_loc_ = 0.0;
  Box bbox_;

  // Uniform bin grid over the bounding box; each bin lists candidate simplices
  // in increasing id order.
  int nbx_ = 1, nby_ = 1;
  double binw_x_ = 1.0, binw_y_ = 1.0;
  std::vector<std::vector<int>> bins_;
};

// Real values attached to mesh vertices.
struct GridFunction {
  const Mesh* mesh = nullptr;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(const Mesh& m, std::vector<double> v);
  GridFunction(const Mesh& m, double fill = 0.0);

  double operator()(int i) const { return values[i]; }
  double& operator()(int i) { return values[i]; }
};

// I[f](x) using the (d+1) vertices of the simplex containing x.
// Throws OutsideHullError when x is not covered.
double interpolate(const GridFunction& f, const Vec& point);

// Uniform 1-D mesh with n segments on [a, b].
Mesh build_interval_mesh(double a, double b, int n);

// Structured triangulation of `box` with every triangle area <= target_area.
Mesh build_box_mesh(const Box& box, double target_area);

// Structured triangulation of `box` with every triangle diameter <= max_diameter.
Mesh build_box_mesh_diameter(const Box& box, double max_diameter);

}  // namespace oslc
