#include "junction/sim/map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace junction::sim {

Route::Route(int entry_arm, int entry_lane, int exit_arm, int exit_lane, Turn turn, std::vector<Vec2> points)
    : entry_arm_(entry_arm),
      entry_lane_(entry_lane),
      exit_arm_(exit_arm),
      exit_lane_(exit_lane),
      turn_(turn),
      points_(std::move(points)) {
  if (points_.size() < 2) throw std::invalid_argument("route needs at least two points");
  cumulative_.reserve(points_.size());
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    cumulative_.push_back(cumulative_.back() + norm(points_[i] - points_[i - 1]));
  }
}

std::size_t Route::segment_index(double s) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  const auto idx = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
  return std::clamp<std::size_t>(idx == 0 ? 0 : idx - 1, 0, points_.size() - 2);
}

Vec2 Route::point_at(double s) const {
  s = std::clamp(s, 0.0, length());
  const std::size_t i = segment_index(s);
  const double seg = cumulative_[i + 1] - cumulative_[i];
  const double t = seg > 0.0 ? (s - cumulative_[i]) / seg : 0.0;
  return points_[i] + (points_[i + 1] - points_[i]) * t;
}

Vec2 Route::tangent_at(double s) const {
  const std::size_t i = segment_index(std::clamp(s, 0.0, length()));
  const Vec2 d = points_[i + 1] - points_[i];
  return d * (1.0 / norm(d));
}

double Route::heading_at(double s) const {
  const Vec2 t = tangent_at(s);
  return std::atan2(t.y, t.x);
}

Route::Projection Route::project(Vec2 p, double s_lo, double s_hi) const {
  s_lo = std::clamp(s_lo, 0.0, length());
  s_hi = std::clamp(s_hi, s_lo, length());
  Projection best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = segment_index(s_lo); i + 1 < points_.size(); ++i) {
    if (cumulative_[i] > s_hi) break;
    const Vec2 a = points_[i];
    const Vec2 d = points_[i + 1] - a;
    const double len = cumulative_[i + 1] - cumulative_[i];
    if (len <= 0.0) continue;
    double s = cumulative_[i] + dot(p - a, d) / len;
    s = std::clamp(s, std::max(s_lo, cumulative_[i]), std::min(s_hi, cumulative_[i + 1]));
    const Vec2 q = a + d * ((s - cumulative_[i]) / len);
    const Vec2 off = p - q;
    const double d2 = dot(off, off);
    if (d2 < best_d2) {
      best_d2 = d2;
      best.s = s;
      best.lateral = cross(d * (1.0 / len), off);
    }
  }
  return best;
}

int exit_arm_for(int entry_arm, Turn turn) {
  switch (turn) {
    case Turn::kStraight:
      return (entry_arm + 2) % 4;
    case Turn::kLeft:
      return (entry_arm + 3) % 4;
    case Turn::kRight:
      return (entry_arm + 1) % 4;
  }
  return entry_arm;
}

MapGeometry::MapGeometry(const MapConfig& config) : config_(config) {
  if (config_.lanes_per_arm < 1) throw std::invalid_argument("lanes_per_arm must be >= 1");
  if (config_.lane_width <= 0.0 || config_.arm_length <= 0.0) {
    throw std::invalid_argument("lane_width and arm_length must be positive");
  }
  if (config_.corner_radius < 0.0 || config_.corner_radius >= config_.arm_length) {
    throw std::invalid_argument("corner_radius must be in [0, arm_length)");
  }
  build_routes();
  build_boundaries();
}

bool MapGeometry::in_conflict_zone(Vec2 p) const {
  const double h = half_width();
  return std::abs(p.x) <= h && std::abs(p.y) <= h;
}

bool MapGeometry::on_drivable(Vec2 p) const {
  const double h = half_width(), e = road_end();
  const double ax = std::abs(p.x), ay = std::abs(p.y);
  if ((ay <= h && ax <= e) || (ax <= h && ay <= e)) return true;
  const double f = config_.corner_radius;
  if (f <= 0.0 || ax > h + f || ay > h + f) return false;
  return norm(Vec2{ax, ay} - Vec2{h + f, h + f}) >= f;
}

namespace {
Vec2 arm_direction(int arm) { return unit(arm * kPi / 2.0); }
}  // namespace

Vec2 MapGeometry::incoming_lane_point(int arm, int lane, double s) const {
  const Vec2 d = arm_direction(arm);
  return d * s + left_normal(d) * ((lane + 0.5) * config_.lane_width);
}

Vec2 MapGeometry::outgoing_lane_point(int arm, int lane, double s) const {
  const Vec2 d = arm_direction(arm);
  return d * s - left_normal(d) * ((lane + 0.5) * config_.lane_width);
}

Vec2 MapGeometry::incoming_direction(int arm) const { return arm_direction(arm) * -1.0; }

std::vector<int> MapGeometry::routes_from(int arm, int lane) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < routes_.size(); ++i) {
    if (routes_[i].entry_arm() == arm && routes_[i].entry_lane() == lane) out.push_back(static_cast<int>(i));
  }
  return out;
}

void MapGeometry::build_routes() {
  const double h = half_width(), end = road_end();
  for (int arm = 0; arm < 4; ++arm) {
    for (int lane = 0; lane < config_.lanes_per_arm; ++lane) {
      for (Turn turn : {Turn::kStraight, Turn::kLeft, Turn::kRight}) {
        const int exit = exit_arm_for(arm, turn);
        std::vector<Vec2> pts{incoming_lane_point(arm, lane, end)};
        if (turn == Turn::kStraight) {
          pts.push_back(outgoing_lane_point(exit, lane, end));
        } else {
          const double offset = (lane + 0.5) * config_.lane_width;
          const Vec2 d_in = incoming_direction(arm);
          const Vec2 d_out = arm_direction(exit);
          // Corner where the entry and exit lane center lines cross.
          const Vec2 entry_pt = incoming_lane_point(arm, lane, 0.0);
          const Vec2 exit_pt = outgoing_lane_point(exit, lane, 0.0);
          const Vec2 corner = entry_pt + d_in * dot(exit_pt - entry_pt, d_in);
          const double radius =
              turn == Turn::kLeft ? h + offset : std::max(h - offset, config_.min_turn_radius);
          const Vec2 start = corner - d_in * radius;
          const double side = turn == Turn::kLeft ? 1.0 : -1.0;
          const Vec2 center = start + left_normal(d_in) * (side * radius);
          const Vec2 r0 = start - center;
          const double phi0 = std::atan2(r0.y, r0.x);
          const int n = std::max(4, static_cast<int>(std::ceil(radius * kPi / 2.0 / config_.arc_sample_spacing)));
          for (int i = 0; i <= n; ++i) {
            const double phi = phi0 + side * (kPi / 2.0) * i / n;
            pts.push_back(center + unit(phi) * radius);
          }
          pts.back() = corner + d_out * radius;
          pts.push_back(outgoing_lane_point(exit, lane, end));
        }
        routes_.emplace_back(arm, lane, exit, lane, turn, std::move(pts));
      }
    }
  }
}

void MapGeometry::build_boundaries() {
  const double h = half_width(), end = road_end(), f = config_.corner_radius;
  for (int arm = 0; arm < 4; ++arm) {
    const Vec2 d = arm_direction(arm);
    const Vec2 n = left_normal(d);
    boundaries_.push_back({d * (h + f) + n * h, d * end + n * h});
    boundaries_.push_back({d * (h + f) - n * h, d * end - n * h});
  }
  if (f <= 0.0) return;
  constexpr int kChords = 8;
  for (int q = 0; q < 4; ++q) {
    const double sx = (q == 0 || q == 3) ? 1.0 : -1.0;
    const double sy = (q < 2) ? 1.0 : -1.0;
    auto at = [&](int i) {
      const double phi = kPi + (kPi / 2.0) * i / kChords;
      return Vec2{sx * (h + f + f * std::cos(phi)), sy * (h + f + f * std::sin(phi))};
    };
    for (int i = 0; i < kChords; ++i) boundaries_.push_back({at(i), at(i + 1)});
  }
}

}  // namespace junction::sim
