#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

namespace junction::sim {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  bool operator==(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline Vec2 unit(double angle) { return {std::cos(angle), std::sin(angle)}; }
inline Vec2 left_normal(Vec2 v) { return {-v.y, v.x}; }

/// Rotates `v` counterclockwise by `angle` radians.
inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Vehicle footprint: a rectangle centered at `center`, long axis along `heading`.
struct OrientedBox {
  Vec2 center;
  double heading = 0.0;
  double half_length = 2.25;
  double half_width = 1.0;

  Vec2 axis_u() const { return unit(heading); }
  Vec2 axis_v() const { return left_normal(axis_u()); }
  /// Counterclockwise, starting front-left.
  std::array<Vec2, 4> corners() const;
  /// Closed containment test.
  bool contains(Vec2 p) const;
};

/// Separating-axis overlap test. Touching boxes count as overlapping.
bool boxes_overlap(const OrientedBox& a, const OrientedBox& b);

/// Area centroid of the intersection polygon, or nullopt when the boxes are disjoint.
std::optional<Vec2> overlap_centroid(const OrientedBox& a, const OrientedBox& b);

/// Distance along a unit-direction ray to the first hit on the box boundary.
/// A ray starting inside the box reports 0.
std::optional<double> ray_box_distance(Vec2 origin, Vec2 dir, const OrientedBox& box);

/// Distance along a unit-direction ray to segment [a, b].
std::optional<double> ray_segment_distance(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b);

/// Sutherland-Hodgman clip of a convex polygon against a convex counterclockwise clipper.
std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject, const std::vector<Vec2>& clipper);

}  // namespace junction::sim
