#pragma once

#include <cstdint>
#include <vector>

#include "junction/sim/geometry.hpp"

namespace junction::sim {

enum class Turn : std::uint8_t { kStraight, kLeft, kRight };

/// Polyline path from the far end of an entry lane to the far end of an exit lane.
class Route {
 public:
  Route() = default;
  Route(int entry_arm, int entry_lane, int exit_arm, int exit_lane, Turn turn, std::vector<Vec2> points);

  int entry_arm() const { return entry_arm_; }
  int entry_lane() const { return entry_lane_; }
  int exit_arm() const { return exit_arm_; }
  int exit_lane() const { return exit_lane_; }
  Turn turn() const { return turn_; }
  const std::vector<Vec2>& points() const { return points_; }

  double length() const { return cumulative_.back(); }
  Vec2 end() const { return points_.back(); }

  Vec2 point_at(double s) const;
  /// Unit tangent at arclength `s` (clamped to the route).
  Vec2 tangent_at(double s) const;
  double heading_at(double s) const;

  struct Projection {
    double s = 0.0;
    /// Signed distance from the route, positive to the left of travel.
    double lateral = 0.0;
  };
  /// Closest point on the route restricted to arclengths in [s_lo, s_hi].
  Projection project(Vec2 p, double s_lo, double s_hi) const;

 private:
  std::size_t segment_index(double s) const;

  int entry_arm_ = 0;
  int entry_lane_ = 0;
  int exit_arm_ = 0;
  int exit_lane_ = 0;
  Turn turn_ = Turn::kStraight;
  std::vector<Vec2> points_;
  std::vector<double> cumulative_;
};

struct MapConfig {
  double arm_length = 60.0;
  double lane_width = 3.5;
  int lanes_per_arm = 2;
  /// Minimum radius for right turns from lanes too far from the corner.
  double min_turn_radius = 4.0;
  /// Curb fillet radius where adjacent arms meet.
  double corner_radius = 5.0;
  double arc_sample_spacing = 0.5;
};

struct Segment2 {
  Vec2 a;
  Vec2 b;
};

/// Four-arm intersection with right-hand traffic. Arm k points outward along
/// angle k*90deg (0 = east, 1 = north, 2 = west, 3 = south). Each arm carries
/// `lanes_per_arm` incoming and `lanes_per_arm` outgoing lanes; lane 0 is
/// nearest the center line.
class MapGeometry {
 public:
  explicit MapGeometry(const MapConfig& config = {});

  const MapConfig& config() const { return config_; }
  /// Half the side of the central square conflict zone.
  double half_width() const { return config_.lanes_per_arm * config_.lane_width; }
  double conflict_zone_side() const { return 2.0 * half_width(); }
  double road_end() const { return half_width() + config_.arm_length; }

  /// Closed test against the central square.
  bool in_conflict_zone(Vec2 p) const;
  bool on_drivable(Vec2 p) const;

  /// Lane center point at distance `s` from the origin along arm `arm`.
  Vec2 incoming_lane_point(int arm, int lane, double s) const;
  Vec2 outgoing_lane_point(int arm, int lane, double s) const;
  /// Direction of travel on an incoming lane (toward the center).
  Vec2 incoming_direction(int arm) const;

  const std::vector<Route>& routes() const { return routes_; }
  /// Indices into routes() for routes starting at (arm, lane).
  std::vector<int> routes_from(int arm, int lane) const;

  /// Road edges as segments, fillets approximated by chords; arm ends are open.
  const std::vector<Segment2>& boundaries() const { return boundaries_; }

 private:
  void build_routes();
  void build_boundaries();

  MapConfig config_;
  std::vector<Route> routes_;
  std::vector<Segment2> boundaries_;
};

/// Turn direction helper: exit arm for a turn from `entry_arm` under right-hand traffic.
int exit_arm_for(int entry_arm, Turn turn);

}  // namespace junction::sim
