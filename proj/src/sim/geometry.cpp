#include "junction/sim/geometry.hpp"

#include <algorithm>
#include <limits>

namespace junction::sim {

double wrap_angle(double a) {
  if (a > -kPi && a <= kPi) return a;
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

std::array<Vec2, 4> OrientedBox::corners() const {
  const Vec2 u = axis_u() * half_length;
  const Vec2 v = axis_v() * half_width;
  return {center + u + v, center - u + v, center - u - v, center + u - v};
}

bool OrientedBox::contains(Vec2 p) const {
  const Vec2 d = p - center;
  return std::abs(dot(d, axis_u())) <= half_length && std::abs(dot(d, axis_v())) <= half_width;
}

namespace {

bool separated_on(Vec2 axis, const std::array<Vec2, 4>& a, const std::array<Vec2, 4>& b) {
  double amin = std::numeric_limits<double>::infinity(), amax = -amin;
  double bmin = amin, bmax = -amin;
  for (const Vec2& p : a) {
    const double s = dot(p, axis);
    amin = std::min(amin, s);
    amax = std::max(amax, s);
  }
  for (const Vec2& p : b) {
    const double s = dot(p, axis);
    bmin = std::min(bmin, s);
    bmax = std::max(bmax, s);
  }
  return amax < bmin || bmax < amin;
}

}  // namespace

bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) {
  const double reach = std::hypot(a.half_length, a.half_width) + std::hypot(b.half_length, b.half_width);
  const Vec2 d = b.center - a.center;
  if (dot(d, d) > reach * reach) return false;

  const auto ca = a.corners();
  const auto cb = b.corners();
  for (Vec2 axis : {a.axis_u(), a.axis_v(), b.axis_u(), b.axis_v()}) {
    if (separated_on(axis, ca, cb)) return false;
  }
  return true;
}

std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject, const std::vector<Vec2>& clipper) {
  std::vector<Vec2> out = subject;
  const std::size_t m = clipper.size();
  for (std::size_t e = 0; e < m && !out.empty(); ++e) {
    const Vec2 p0 = clipper[e];
    const Vec2 p1 = clipper[(e + 1) % m];
    const Vec2 edge = p1 - p0;
    auto inside = [&](Vec2 q) { return cross(edge, q - p0) >= 0.0; };

    std::vector<Vec2> in = std::move(out);
    out.clear();
    for (std::size_t i = 0; i < in.size(); ++i) {
      const Vec2 cur = in[i];
      const Vec2 prev = in[(i + in.size() - 1) % in.size()];
      const bool cur_in = inside(cur), prev_in = inside(prev);
      if (cur_in != prev_in) {
        const Vec2 seg = cur - prev;
        const double denom = cross(edge, seg);
        if (denom != 0.0) {
          const double t = cross(p0 - prev, edge) / -denom;
          out.push_back(prev + seg * t);
        }
      }
      if (cur_in) out.push_back(cur);
    }
  }
  return out;
}

std::optional<Vec2> overlap_centroid(const OrientedBox& a, const OrientedBox& b) {
  if (!boxes_overlap(a, b)) return std::nullopt;
  const auto ca = a.corners();
  const auto cb = b.corners();
  const std::vector<Vec2> poly =
      clip_convex(std::vector<Vec2>(ca.begin(), ca.end()), std::vector<Vec2>(cb.begin(), cb.end()));
  if (poly.empty()) return (a.center + b.center) * 0.5;

  double area2 = 0.0;
  Vec2 acc;
  Vec2 mean;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 p = poly[i], q = poly[(i + 1) % poly.size()];
    const double c = cross(p, q);
    area2 += c;
    acc += (p + q) * c;
    mean += p;
  }
  if (std::abs(area2) < 1e-12) return mean * (1.0 / static_cast<double>(poly.size()));
  return acc * (1.0 / (3.0 * area2));
}

std::optional<double> ray_box_distance(Vec2 origin, Vec2 dir, const OrientedBox& box) {
  // Slab test in the box frame.
  const Vec2 d = origin - box.center;
  const Vec2 u = box.axis_u(), v = box.axis_v();
  const double o[2] = {dot(d, u), dot(d, v)};
  const double r[2] = {dot(dir, u), dot(dir, v)};
  const double h[2] = {box.half_length, box.half_width};

  double tmin = 0.0;
  double tmax = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 2; ++k) {
    if (std::abs(r[k]) < 1e-15) {
      if (std::abs(o[k]) > h[k]) return std::nullopt;
      continue;
    }
    double t0 = (-h[k] - o[k]) / r[k];
    double t1 = (h[k] - o[k]) / r[k];
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return std::nullopt;
  }
  return tmin;
}

std::optional<double> ray_segment_distance(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b) {
  const Vec2 s = b - a;
  const double denom = cross(dir, s);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const Vec2 ao = a - origin;
  const double t = cross(ao, s) / denom;
  const double w = cross(ao, dir) / denom;
  if (t < 0.0 || w < 0.0 || w > 1.0) return std::nullopt;
  return t;
}

}  // namespace junction::sim
