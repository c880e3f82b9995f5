#pragma once

#include <cmath>
#include <vector>

namespace coloc {

/// A position in the plane, in meters.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend constexpr bool operator==(Point2, Point2) = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double squared_norm(Point2 p) { return dot(p, p); }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
constexpr double squared_distance(Point2 a, Point2 b) { return squared_norm(a - b); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

using Points = std::vector<Point2>;

}  // namespace coloc
