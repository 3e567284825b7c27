#pragma once

#include <optional>
#include <vector>

#include "junction/sim/world.hpp"

namespace junction::rewards {

struct RewardConfig {
  double c_progress = 1.0;           // per meter of route progress
  double c_speed = 0.1;              // per step, scaled by v / v_max
  double arrival_bonus = 10.0;
  double crash_penalty = 5.0;        // P_c, per contacting pair per step
  double out_of_road_penalty = 5.0;  // P_o, per off-road step
  bool safe_distance_enabled = false;
  bool right_of_way_enabled = false;
  double safe_distance_threshold = 5.0;
  int front_sector_rays = 10;

  void validate() const;
};

struct RewardBreakdown {
  double progress = 0.0;
  double speed = 0.0;
  double arrival = 0.0;
  double crash_penalty = 0.0;
  double out_of_road_penalty = 0.0;
  double safe_distance_penalty = 0.0;
  double right_of_way_adjustment = 0.0;
  double total = 0.0;

  /// Recomputes `total` from the components and returns it.
  double finalize();
};

/// One agent's step as seen by the reward function.
struct Transition {
  sim::VehicleState before;
  sim::VehicleState after;
  bool arrived_now = false;
};

/// Driving reward only; the shaping fields stay zero and the crash component
/// charges P_c once per contacting pair.
RewardBreakdown base_reward(const Transition& t, int contacting_pairs, const RewardConfig& config,
                            double max_speed);

/// Ray indices of the front sensing sector: `count` consecutive rays
/// centered on the heading, ray offsets -count/2 ... count/2 - 1.
std::vector<int> front_sector(int rays, int count);

/// Minimum front-sector distance in meters.
double front_distance(const sim::LidarScan& scan, const RewardConfig& config);

/// Linear penalty in [-0.5, 0] for a front obstruction closer than the threshold.
double safe_distance_penalty_at(double distance, const RewardConfig& config);
double safe_distance_penalty(const sim::LidarScan& scan, const RewardConfig& config);

/// Deterministic fault rule for a colliding pair. Ordered rules, first match wins:
///  1. rear-end: the contact point is within 45deg of one vehicle's heading and
///     within 45deg of the other's reverse heading; the front-hitter is at fault.
///  2. both vehicles in the conflict zone and exactly one has the other on its
///     right: that vehicle failed to yield and is at fault.
///  3. the faster vehicle (absolute speed); ties go to the lower id.
int assign_responsibility(const sim::CollisionEvent& event, const sim::World& world);

struct PairPenalty {
  int i = 0;
  int j = 0;
  double penalty_i = 0.0;
  double penalty_j = 0.0;
};

/// Crash penalties for one contacting pair. With right-of-way on, the at-fault
/// vehicle takes 2 * (-P_c) and the other 0; otherwise both take -P_c.
PairPenalty right_of_way_penalty(const sim::CollisionEvent& event, int responsible, const RewardConfig& config);

/// Full per-agent reward for one step. `scan` is the agent's post-step scan
/// (absent once the agent has arrived); `events` are this step's collision
/// events, of which only those involving `agent` contribute.
RewardBreakdown total_reward(int agent, const Transition& t, const std::optional<sim::LidarScan>& scan,
                             const std::vector<sim::CollisionEvent>& events, const sim::World& world,
                             const RewardConfig& config);

}  // namespace junction::rewards
