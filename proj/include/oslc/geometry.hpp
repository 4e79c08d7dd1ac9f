#pragma once

#include <array>
#include <cmath>

namespace oslc {

// Point/vector in R^d, d <= 2. The unused component stays 0 in 1-D so the
// arithmetic below is dimension-agnostic.
struct Vec {
  double x = 0.0;
  double y = 0.0;

  Vec() = default;
  Vec(double x_, double y_ = 0.0) : x(x_), y(y_) {}

  Vec operator+(const Vec& o) const { return {x + o.x, y + o.y}; }
  Vec operator-(const Vec& o) const { return {x - o.x, y - o.y}; }
  Vec operator*(double s) const { return {x * s, y * s}; }
  Vec& operator+=(const Vec& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  double dot(const Vec& o) const { return x * o.x + y * o.y; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
};

inline Vec operator*(double s, const Vec& v) { return v * s; }

// Axis-aligned box; in 1-D only the x extent is meaningful.
struct Box {
  Vec lo;
  Vec hi;

  bool contains(const Vec& p, int dim) const {
    if (p.x < lo.x || p.x > hi.x) return false;
    if (dim > 1 && (p.y < lo.y || p.y > hi.y)) return false;
    return true;
  }
  Vec clamp(const Vec& p) const {
    return {std::fmin(std::fmax(p.x, lo.x), hi.x),
            std::fmin(std::fmax(p.y, lo.y), hi.y)};
  }
  Box expanded(double m) const { return {{lo.x - m, lo.y - m}, {hi.x + m, hi.y + m}}; }
};

}  // namespace oslc
