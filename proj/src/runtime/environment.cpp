#include "junction/runtime/environment.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace junction::runtime {

Environment::Environment(EnvConfig config, bool record)
    : config_(std::move(config)),
      map_(std::make_shared<const sim::MapGeometry>(config_.sim.map)),
      world_(sim::World::reset(config_.sim, map_, 0)),
      record_(record) {
  config_.rewards.validate();
  reset(0);
}

void Environment::reset(std::uint64_t episode_seed) {
  seed_ = episode_seed;
  world_ = sim::World::reset(config_.sim, map_, episode_seed);
  refresh_observations();
  if (record_) {
    log_ = {};
    metrics::LogHeader& h = log_.header;
    h.seed = episode_seed;
    h.n_vehicles = config_.sim.n_vehicles;
    h.dt = config_.sim.dt;
    h.max_steps = config_.sim.max_steps;
    h.map = config_.sim.map;
    h.vehicle_length = config_.sim.vehicle.length;
    h.vehicle_width = config_.sim.vehicle.width;
    h.lidar_rays = config_.sim.lidar.rays;
    h.lidar_range = config_.sim.lidar.range;
    h.front_sector_rays = config_.rewards.front_sector_rays;
  }
}

void Environment::refresh_observations() {
  const int n = world_.num_agents();
  scans_.assign(n, std::nullopt);
  obs_.assign(n, {});
  for (int i = 0; i < n; ++i) {
    if (!active(i)) continue;
    scans_[i] = world_.lidar_scan(i);
    obs_[i] = world_.observe(i, *scans_[i]);
  }
}

const std::vector<double>& Environment::observation(int agent) const {
  if (!active(agent)) throw std::invalid_argument("observation: agent " + std::to_string(agent) + " is inactive");
  return obs_[agent];
}

std::vector<int> Environment::active_agents() const {
  std::vector<int> out;
  for (int i = 0; i < num_agents(); ++i) {
    if (active(i)) out.push_back(i);
  }
  return out;
}

Environment::StepResult Environment::step(const std::vector<sim::Action>& actions) {
  const std::size_t events_before = world_.state().event_log.size();
  const auto outcomes = world_.step(actions);
  refresh_observations();

  std::vector<sim::CollisionEvent> events;
  const auto& log = world_.state().event_log;
  for (std::size_t k = events_before; k < log.size(); ++k) {
    const sim::WorldEvent& e = log[k];
    if (e.kind == sim::EventKind::kCollision) events.push_back({e.agent, e.other, e.point, e.step, e.onset});
  }

  const int n = num_agents();
  StepResult r;
  r.rewards.resize(n);
  r.acted.assign(n, 0);
  r.arrived.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    const sim::StepOutcome& o = outcomes[i];
    if (!o.acted) continue;
    r.acted[i] = 1;
    r.arrived[i] = o.arrived_now ? 1 : 0;
    r.rewards[i] = rewards::total_reward(i, {o.before, o.after, o.arrived_now}, scans_[i], events, world_,
                                         config_.rewards);
  }
  r.episode_done = world_.done();

  if (record_) {
    const int step = world_.state().step;
    for (int i = 0; i < n; ++i) {
      if (!r.acted[i]) continue;
      const sim::VehicleState& v = outcomes[i].after;
      metrics::AgentRecord rec;
      rec.step = step;
      rec.agent = i;
      rec.x = v.position.x;
      rec.y = v.position.y;
      rec.heading = v.heading;
      rec.speed = v.speed;
      rec.prev_speed = outcomes[i].before.speed;
      rec.steer = v.last_action.steer;
      rec.throttle = v.last_action.throttle;
      rec.route_progress = v.route_progress;
      rec.in_contact = v.in_contact;
      rec.off_road = v.off_road;
      rec.arrived = v.arrived;
      if (scans_[i]) {
        const auto& d = scans_[i]->distances;
        rec.has_lidar = true;
        rec.lidar_mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
        rec.front_min = rewards::front_distance(*scans_[i], config_.rewards) / scans_[i]->range;
      }
      rec.reward = r.rewards[i];
      log_.records.push_back(rec);
    }
    for (const auto& e : events) log_.collisions.push_back({e.step, e.i, e.j, e.contact_point.x, e.contact_point.y, e.onset});
    if (r.episode_done) {
      log_.episode_steps = step;
      log_.complete = true;
    }
  }
  return r;
}

}  // namespace junction::runtime
