#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "junction/rewards/rewards.hpp"
#include "junction/sim/map.hpp"

namespace junction::metrics {

/// Scenario parameters needed to interpret and render a log.
struct LogHeader {
  std::uint64_t seed = 0;
  int n_vehicles = 0;
  double dt = 0.1;
  int max_steps = 1000;
  sim::MapConfig map;
  double vehicle_length = 4.5;
  double vehicle_width = 2.0;
  int lidar_rays = 72;
  double lidar_range = 50.0;
  int front_sector_rays = 10;
};

/// State of one agent after world step `step` (1-based). Only agents that
/// acted in that step have a record, so an arriving agent's last record is
/// the one with `arrived` set.
struct AgentRecord {
  int step = 0;
  int agent = 0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;
  double prev_speed = 0.0;
  double steer = 0.0;
  double throttle = 0.0;
  double route_progress = 0.0;
  bool in_contact = false;
  bool off_road = false;
  bool arrived = false;
  // Lidar summaries are absent for the arrival step (no post-step scan).
  bool has_lidar = false;
  double lidar_mean = 0.0;  // mean normalized ray value
  double front_min = 0.0;   // min normalized value in the front sector
  rewards::RewardBreakdown reward;
};

struct CollisionRecord {
  int step = 0;
  int i = 0;
  int j = 0;
  double x = 0.0;
  double y = 0.0;
  bool onset = false;
};

struct TrajectoryLog {
  LogHeader header;
  int episode_steps = 0;  // termination step; 0 until the episode is closed
  bool complete = false;
  std::vector<AgentRecord> records;  // ordered by (step, agent)
  std::vector<CollisionRecord> collisions;

  /// Throws std::invalid_argument describing the first defect found.
  void validate() const;
};

// Line-delimited JSON. First line {"type":"header",...}, then one
// {"type":"agent",...} per record and {"type":"collision",...} per contact
// event in step order, closed by {"type":"end","episode_steps":N}.
void write_log(const TrajectoryLog& log, std::ostream& out);
TrajectoryLog read_log(std::istream& in);
void save_log(const std::filesystem::path& path, const TrajectoryLog& log);
TrajectoryLog load_log(const std::filesystem::path& path);

}  // namespace junction::metrics
