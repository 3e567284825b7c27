#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "junction/metrics/trajectory_log.hpp"

namespace junction::metrics {

inline constexpr std::size_t kNumMetrics = 17;

/// CSV row labels, in report order.
inline constexpr std::array<const char*, kNumMetrics> kMetricLabels = {
    "success",
    "out_of_road",
    "crash_vehicle",
    "velocity_mean",
    "velocity_mean_in_conflict_zone",
    "acceleration",
    "acceleration_in_conflict_zone",
    "arrive_steps",
    "episode_steps",
    "mean_conflict_zone_num",
    "max_conflict_zone_num",
    "conflict_zone_when_crash",
    "front_end_distance",
    "limited_lidar",
    "limited_lidar_in_conflict_zone",
    "front_end_distance_in_conflict_zone",
    "pair_distance",
};

/// Per-episode indicators. Means over an empty subset are 0, except
/// arrive_steps which falls back to max_steps when nobody arrives.
struct EpisodeMetrics {
  double success = 0.0;         // arrived vehicles
  double out_of_road = 0.0;     // (step, agent) off-road occurrences
  double crash_vehicle = 0.0;   // (step, agent) in-contact occurrences
  double velocity_mean = 0.0;   // mean |v| over (step, agent), m/s
  double velocity_mean_in_conflict_zone = 0.0;
  double acceleration = 0.0;    // mean |dv| / dt, m/s^2
  double acceleration_in_conflict_zone = 0.0;
  double arrive_steps = 0.0;
  double episode_steps = 0.0;
  double mean_conflict_zone_num = 0.0;  // over steps 1..episode_steps
  double max_conflict_zone_num = 0.0;
  double conflict_zone_when_crash = 0.0;  // over distinct contact-onset steps
  double front_end_distance = 0.0;
  double limited_lidar = 0.0;
  double limited_lidar_in_conflict_zone = 0.0;
  double front_end_distance_in_conflict_zone = 0.0;
  double pair_distance = 0.0;  // mean over (step, pair) of non-arrived actors, m

  std::array<double, kNumMetrics> values() const;
  static EpisodeMetrics from_values(const std::array<double, kNumMetrics>& v);
};

/// Pure function of the log; throws std::invalid_argument on malformed or
/// incomplete logs.
EpisodeMetrics compute_episode_metrics(const TrajectoryLog& log);

/// Per-step count of recorded agents inside the conflict zone, index 0 is step 1.
std::vector<int> conflict_zone_occupancy(const TrajectoryLog& log);

struct MetricsReport {
  EpisodeMetrics mean;
  int episodes = 0;
  std::uint64_t config_hash = 0;
  std::vector<std::uint64_t> seeds;
};

/// Arithmetic mean per field; throws std::invalid_argument on an empty list.
MetricsReport aggregate(const std::vector<EpisodeMetrics>& episodes, std::uint64_t config_hash = 0,
                        std::vector<std::uint64_t> seeds = {});

/// "metric,value" header then one row per label.
std::string report_csv(const MetricsReport& report);
std::string report_json(const MetricsReport& report);

}  // namespace junction::metrics
