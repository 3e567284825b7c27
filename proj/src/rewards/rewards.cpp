#include "junction/rewards/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace junction::rewards {

using sim::Vec2;

void RewardConfig::validate() const {
  auto nonneg = [](double v, const char* key) {
    if (!(v >= 0.0)) throw std::invalid_argument(std::string(key) + ": must be >= 0");
  };
  nonneg(c_progress, "rewards.c_progress");
  nonneg(c_speed, "rewards.c_speed");
  nonneg(arrival_bonus, "rewards.arrival_bonus");
  nonneg(crash_penalty, "rewards.crash_penalty");
  nonneg(out_of_road_penalty, "rewards.out_of_road_penalty");
  if (safe_distance_enabled && safe_distance_threshold != 5.0) {
    throw std::invalid_argument("rewards.safe_distance_threshold: must be 5 when safe distance is enabled");
  }
  if (front_sector_rays < 1) throw std::invalid_argument("rewards.front_sector_rays: must be >= 1");
}

double RewardBreakdown::finalize() {
  total = progress + speed + arrival + crash_penalty + out_of_road_penalty + safe_distance_penalty +
          right_of_way_adjustment;
  return total;
}

RewardBreakdown base_reward(const Transition& t, int contacting_pairs, const RewardConfig& config,
                            double max_speed) {
  RewardBreakdown r;
  r.progress = config.c_progress * (t.after.route_progress - t.before.route_progress);
  r.speed = config.c_speed * std::max(t.after.speed, 0.0) / max_speed;
  r.arrival = t.arrived_now ? config.arrival_bonus : 0.0;
  r.crash_penalty = -config.crash_penalty * contacting_pairs;
  r.out_of_road_penalty = t.after.off_road ? -config.out_of_road_penalty : 0.0;
  r.finalize();
  return r;
}

std::vector<int> front_sector(int rays, int count) {
  count = std::min(count, rays);
  std::vector<int> out;
  out.reserve(count);
  for (int k = -count / 2; k < count - count / 2; ++k) out.push_back(((k % rays) + rays) % rays);
  return out;
}

double front_distance(const sim::LidarScan& scan, const RewardConfig& config) {
  double m = 1.0;
  for (int k : front_sector(static_cast<int>(scan.distances.size()), config.front_sector_rays)) {
    m = std::min(m, scan.distances[k]);
  }
  return m * scan.range;
}

double safe_distance_penalty_at(double distance, const RewardConfig& config) {
  const double th = config.safe_distance_threshold;
  const double d = std::clamp(distance, 0.0, th);
  if (d >= th) return 0.0;
  return -0.5 * (th - d) / th;
}

double safe_distance_penalty(const sim::LidarScan& scan, const RewardConfig& config) {
  return safe_distance_penalty_at(front_distance(scan, config), config);
}

namespace {

constexpr double kSectorHalfAngle = sim::kPi / 4.0;

bool within_sector(Vec2 offset, double direction) {
  if (sim::norm(offset) == 0.0) return false;
  const double bearing = std::atan2(offset.y, offset.x);
  return std::abs(sim::wrap_angle(bearing - direction)) <= kSectorHalfAngle;
}

/// True when `other` lies strictly on the right-hand side of `self`'s heading.
bool on_right(const sim::VehicleState& self, const sim::VehicleState& other) {
  return sim::cross(sim::unit(self.heading), other.position - self.position) < 0.0;
}

}  // namespace

int assign_responsibility(const sim::CollisionEvent& e, const sim::World& world) {
  const auto& vi = world.state().vehicles.at(e.i);
  const auto& vj = world.state().vehicles.at(e.j);

  const Vec2 ci = e.contact_point - vi.position;
  const Vec2 cj = e.contact_point - vj.position;
  const bool i_front = within_sector(ci, vi.heading), i_rear = within_sector(ci, vi.heading + sim::kPi);
  const bool j_front = within_sector(cj, vj.heading), j_rear = within_sector(cj, vj.heading + sim::kPi);
  if (i_front && j_rear && !(j_front && i_rear)) return e.i;
  if (j_front && i_rear && !(i_front && j_rear)) return e.j;

  if (world.in_conflict_zone(vi.position) && world.in_conflict_zone(vj.position)) {
    const bool i_yields = on_right(vi, vj);
    const bool j_yields = on_right(vj, vi);
    if (i_yields && !j_yields) return e.i;
    if (j_yields && !i_yields) return e.j;
  }

  const double si = std::abs(vi.speed), sj = std::abs(vj.speed);
  if (si > sj) return e.i;
  if (sj > si) return e.j;
  return std::min(e.i, e.j);
}

PairPenalty right_of_way_penalty(const sim::CollisionEvent& e, int responsible, const RewardConfig& config) {
  PairPenalty p{e.i, e.j, -config.crash_penalty, -config.crash_penalty};
  if (!config.right_of_way_enabled) return p;
  if (responsible != e.i && responsible != e.j) throw std::invalid_argument("responsible agent not in pair");
  p.penalty_i = responsible == e.i ? -2.0 * config.crash_penalty : 0.0;
  p.penalty_j = responsible == e.j ? -2.0 * config.crash_penalty : 0.0;
  return p;
}

RewardBreakdown total_reward(int agent, const Transition& t, const std::optional<sim::LidarScan>& scan,
                             const std::vector<sim::CollisionEvent>& events, const sim::World& world,
                             const RewardConfig& config) {
  RewardBreakdown r = base_reward(t, 0, config, world.config().vehicle.max_speed);
  for (const auto& e : events) {
    if (e.i != agent && e.j != agent) continue;
    if (!config.right_of_way_enabled) {
      r.crash_penalty -= config.crash_penalty;
      continue;
    }
    const PairPenalty p = right_of_way_penalty(e, assign_responsibility(e, world), config);
    r.right_of_way_adjustment += agent == e.i ? p.penalty_i : p.penalty_j;
  }
  if (config.safe_distance_enabled && scan) r.safe_distance_penalty = safe_distance_penalty(*scan, config);
  r.finalize();
  return r;
}

}  // namespace junction::rewards
