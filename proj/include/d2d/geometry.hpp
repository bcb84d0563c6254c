#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>

namespace d2d {

/// Geometric predicates use this absolute tolerance (km).
inline constexpr double kGeomTolerance = 1e-9;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point a, Point b) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

inline Point lerp(Point a, Point b, double s) { return a + s * (b - a); }

/// Closest point of segment [a,b] to p, as a parameter s in [0,1].
inline double project_parameter(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 <= 0.0) return 0.0;
  return std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
}

/// Liang-Barsky clip of segment [a,b] against the square [0,side]^2.
/// Returns the surviving parameter range [s0,s1] or nothing if the segment misses the box.
inline std::optional<std::pair<double, double>> clip_to_square(Point a, Point b, double side) {
  double s0 = 0.0;
  double s1 = 1.0;
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x, side - a.x, a.y, side - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return std::nullopt;
      continue;
    }
    const double s = q[i] / p[i];
    if (p[i] < 0.0) {
      if (s > s1) return std::nullopt;
      s0 = std::max(s0, s);
    } else {
      if (s < s0) return std::nullopt;
      s1 = std::min(s1, s);
    }
  }
  return std::make_pair(s0, s1);
}

}  // namespace d2d
