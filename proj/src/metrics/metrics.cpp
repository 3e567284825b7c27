#include "junction/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace junction::metrics {

namespace {

struct Mean {
  double sum = 0.0;
  long long n = 0;
  void add(double x) {
    sum += x;
    ++n;
  }
  double value() const { return n > 0 ? sum / static_cast<double>(n) : 0.0; }
};

}  // namespace

std::array<double, kNumMetrics> EpisodeMetrics::values() const {
  return {success,
          out_of_road,
          crash_vehicle,
          velocity_mean,
          velocity_mean_in_conflict_zone,
          acceleration,
          acceleration_in_conflict_zone,
          arrive_steps,
          episode_steps,
          mean_conflict_zone_num,
          max_conflict_zone_num,
          conflict_zone_when_crash,
          front_end_distance,
          limited_lidar,
          limited_lidar_in_conflict_zone,
          front_end_distance_in_conflict_zone,
          pair_distance};
}

EpisodeMetrics EpisodeMetrics::from_values(const std::array<double, kNumMetrics>& v) {
  EpisodeMetrics m;
  double* fields[] = {&m.success,
                      &m.out_of_road,
                      &m.crash_vehicle,
                      &m.velocity_mean,
                      &m.velocity_mean_in_conflict_zone,
                      &m.acceleration,
                      &m.acceleration_in_conflict_zone,
                      &m.arrive_steps,
                      &m.episode_steps,
                      &m.mean_conflict_zone_num,
                      &m.max_conflict_zone_num,
                      &m.conflict_zone_when_crash,
                      &m.front_end_distance,
                      &m.limited_lidar,
                      &m.limited_lidar_in_conflict_zone,
                      &m.front_end_distance_in_conflict_zone,
                      &m.pair_distance};
  for (std::size_t k = 0; k < kNumMetrics; ++k) *fields[k] = v[k];
  return m;
}

std::vector<int> conflict_zone_occupancy(const TrajectoryLog& log) {
  const sim::MapGeometry map(log.header.map);
  std::vector<int> occupancy(static_cast<std::size_t>(std::max(0, log.episode_steps)), 0);
  for (const AgentRecord& r : log.records) {
    if (map.in_conflict_zone({r.x, r.y})) ++occupancy.at(static_cast<std::size_t>(r.step - 1));
  }
  return occupancy;
}

EpisodeMetrics compute_episode_metrics(const TrajectoryLog& log) {
  log.validate();
  const sim::MapGeometry map(log.header.map);
  const double dt = log.header.dt;

  EpisodeMetrics m;
  Mean vel, vel_zone, acc, acc_zone, arrive, front, front_zone, lidar, lidar_zone, pair;
  for (const AgentRecord& r : log.records) {
    const bool zone = map.in_conflict_zone({r.x, r.y});
    if (r.arrived) {
      m.success += 1.0;
      arrive.add(r.step);
    }
    if (r.off_road) m.out_of_road += 1.0;
    if (r.in_contact) m.crash_vehicle += 1.0;
    const double v = std::abs(r.speed);
    const double a = std::abs(r.speed - r.prev_speed) / dt;
    vel.add(v);
    acc.add(a);
    if (zone) {
      vel_zone.add(v);
      acc_zone.add(a);
    }
    if (r.has_lidar) {
      front.add(r.front_min);
      lidar.add(r.lidar_mean);
      if (zone) {
        front_zone.add(r.front_min);
        lidar_zone.add(r.lidar_mean);
      }
    }
  }

  // Pairwise distances among agents still on the road after each step.
  for (std::size_t lo = 0; lo < log.records.size();) {
    std::size_t hi = lo;
    while (hi < log.records.size() && log.records[hi].step == log.records[lo].step) ++hi;
    for (std::size_t a = lo; a < hi; ++a) {
      if (log.records[a].arrived) continue;
      for (std::size_t b = a + 1; b < hi; ++b) {
        if (log.records[b].arrived) continue;
        pair.add(std::hypot(log.records[a].x - log.records[b].x, log.records[a].y - log.records[b].y));
      }
    }
    lo = hi;
  }

  const std::vector<int> occupancy = conflict_zone_occupancy(log);
  Mean occ;
  for (int o : occupancy) {
    occ.add(o);
    m.max_conflict_zone_num = std::max(m.max_conflict_zone_num, static_cast<double>(o));
  }
  std::set<int> onset_steps;
  for (const CollisionRecord& c : log.collisions) {
    if (c.onset) onset_steps.insert(c.step);
  }
  Mean at_crash;
  for (int s : onset_steps) at_crash.add(occupancy[static_cast<std::size_t>(s - 1)]);

  m.velocity_mean = vel.value();
  m.velocity_mean_in_conflict_zone = vel_zone.value();
  m.acceleration = acc.value();
  m.acceleration_in_conflict_zone = acc_zone.value();
  m.arrive_steps = arrive.n > 0 ? arrive.value() : static_cast<double>(log.header.max_steps);
  m.episode_steps = log.episode_steps;
  m.mean_conflict_zone_num = occ.value();
  m.conflict_zone_when_crash = at_crash.value();
  m.front_end_distance = front.value();
  m.limited_lidar = lidar.value();
  m.limited_lidar_in_conflict_zone = lidar_zone.value();
  m.front_end_distance_in_conflict_zone = front_zone.value();
  m.pair_distance = pair.value();
  return m;
}

MetricsReport aggregate(const std::vector<EpisodeMetrics>& episodes, std::uint64_t config_hash,
                        std::vector<std::uint64_t> seeds) {
  if (episodes.empty()) throw std::invalid_argument("aggregate: no episodes");
  std::array<double, kNumMetrics> sum{};
  for (const EpisodeMetrics& e : episodes) {
    const auto v = e.values();
    for (std::size_t k = 0; k < kNumMetrics; ++k) sum[k] += v[k];
  }
  for (double& s : sum) s /= static_cast<double>(episodes.size());
  MetricsReport r;
  r.mean = EpisodeMetrics::from_values(sum);
  r.episodes = static_cast<int>(episodes.size());
  r.config_hash = config_hash;
  r.seeds = std::move(seeds);
  return r;
}

std::string report_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "metric,value\n";
  const auto v = report.mean.values();
  for (std::size_t k = 0; k < kNumMetrics; ++k) out << kMetricLabels[k] << ',' << v[k] << '\n';
  return out.str();
}

std::string report_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["episodes"] = report.episodes;
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << report.config_hash;
  j["config_hash"] = hash.str();
  j["seeds"] = report.seeds;
  auto& means = j["metrics"] = nlohmann::ordered_json::object();
  const auto v = report.mean.values();
  for (std::size_t k = 0; k < kNumMetrics; ++k) means[kMetricLabels[k]] = v[k];
  return j.dump(2);
}

}  // namespace junction::metrics
