#include "junction/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace junction::sim {

void SimConfig::validate() const {
  auto require = [](bool ok, const char* key, const char* what) {
    if (!ok) throw std::invalid_argument(std::string(key) + ": " + what);
  };
  require(map.lanes_per_arm >= 1, "sim.lanes_per_arm", "must be >= 1");
  require(map.lane_width > 0.0, "sim.lane_width", "must be > 0");
  require(map.arm_length > 0.0, "sim.arm_length", "must be > 0");
  require(n_vehicles >= 1, "sim.n_vehicles", "must be >= 1");
  require(dt > 0.0, "sim.dt", "must be > 0");
  require(max_steps >= 1, "sim.max_steps", "must be >= 1");
  require(spawn_headway > vehicle.length, "sim.spawn_headway", "must exceed the vehicle length");
  require(first_slot_gap >= 0.0, "sim.first_slot_gap", "must be >= 0");
  require(arrival_radius > 0.0, "sim.arrival_radius", "must be > 0");
  require(lidar.rays >= 1, "sim.lidar_rays", "must be >= 1");
  require(lidar.range > 0.0, "sim.lidar_range", "must be > 0");
  require(checkpoint_spacing > 0.0, "sim.checkpoint_spacing", "must be > 0");
  require(nav_scale > 0.0, "sim.nav_scale", "must be > 0");
}

double ray_angle(const LidarConfig& lidar, int ray) { return 2.0 * kPi * ray / lidar.rays; }

World::World(SimConfig config, std::shared_ptr<const MapGeometry> map)
    : config_(std::move(config)), map_(std::move(map)) {}

World World::reset(const SimConfig& config, std::uint64_t seed) {
  return reset(config, std::make_shared<const MapGeometry>(config.map), seed);
}

World World::reset(const SimConfig& config, std::shared_ptr<const MapGeometry> map, std::uint64_t seed) {
  config.validate();
  World w(config, std::move(map));
  WorldState& st = w.state_;
  st.rng.seed(seed);

  const int lanes = config.map.lanes_per_arm;
  const int entry_lanes = 4 * lanes;
  const double h = w.map_->half_width();
  const double half_len = config.vehicle.length / 2.0;
  const int depth_needed = (config.n_vehicles - 1) / entry_lanes;
  const double deepest = h + config.first_slot_gap + depth_needed * config.spawn_headway;
  if (deepest + half_len > w.map_->road_end() || config.first_slot_gap < half_len) {
    throw std::invalid_argument("sim.arm_length: too short to queue " + std::to_string(config.n_vehicles) +
                                " vehicles without overlap");
  }

  // Per entry lane, a seeded shuffle of its legal exits; queued vehicles take them round-robin.
  std::vector<std::vector<int>> lane_routes(entry_lanes);
  for (int k = 0; k < lanes; ++k) {
    for (int arm = 0; arm < 4; ++arm) {
      auto& r = lane_routes[k * 4 + arm];
      r = w.map_->routes_from(arm, k);
      for (std::size_t i = r.size(); i > 1; --i) {
        std::swap(r[i - 1], r[st.rng() % i]);
      }
    }
  }

  for (int i = 0; i < config.n_vehicles; ++i) {
    const int depth = i / entry_lanes;
    const int slot = i % entry_lanes;
    const int lane = slot / 4, arm = slot % 4;
    const auto& candidates = lane_routes[slot];
    const int route_id = candidates[depth % candidates.size()];
    const Route& route = w.map_->routes()[route_id];

    VehicleState v;
    v.position = w.map_->incoming_lane_point(arm, lane, h + config.first_slot_gap + depth * config.spawn_headway);
    v.route_progress = route.project(v.position, 0.0, route.length()).s;
    v.heading = route.heading_at(v.route_progress);
    st.vehicles.push_back(v);
    st.route_ids.push_back(route_id);
  }
  return w;
}

World World::from_vehicles(const SimConfig& config, std::vector<VehicleState> vehicles, std::vector<int> route_ids) {
  config.validate();
  if (vehicles.size() != route_ids.size()) throw std::invalid_argument("vehicles/route_ids size mismatch");
  World w(config, std::make_shared<const MapGeometry>(config.map));
  for (int id : route_ids) {
    if (id < 0 || id >= static_cast<int>(w.map_->routes().size())) throw std::invalid_argument("bad route id");
  }
  w.state_.vehicles = std::move(vehicles);
  w.state_.route_ids = std::move(route_ids);
  return w;
}

int World::num_active() const {
  return static_cast<int>(std::count_if(state_.vehicles.begin(), state_.vehicles.end(),
                                        [](const VehicleState& v) { return v.active; }));
}

bool World::footprint_off_road(const VehicleState& v) const {
  for (const Vec2& c : footprint(v, config_.vehicle).corners()) {
    if (!map_->on_drivable(c)) return true;
  }
  return false;
}

std::vector<CollisionEvent> World::detect_collisions() const {
  std::vector<CollisionEvent> events;
  const auto& vs = state_.vehicles;
  for (int i = 0; i < num_agents(); ++i) {
    if (!vs[i].active) continue;
    const OrientedBox bi = footprint(vs[i], config_.vehicle);
    for (int j = i + 1; j < num_agents(); ++j) {
      if (!vs[j].active) continue;
      const auto cp = overlap_centroid(bi, footprint(vs[j], config_.vehicle));
      if (!cp) continue;
      events.push_back({i, j, *cp, state_.step, !state_.contacts.contains({i, j})});
    }
  }
  return events;
}

std::vector<StepOutcome> World::step(std::span<const Action> actions) {
  if (state_.done) throw std::logic_error("step() called on a finished episode");
  if (static_cast<int>(actions.size()) != num_agents()) {
    throw std::invalid_argument("expected " + std::to_string(num_agents()) + " actions, got " +
                                std::to_string(actions.size()));
  }

  std::vector<StepOutcome> out(num_agents());
  for (int i = 0; i < num_agents(); ++i) {
    VehicleState& v = state_.vehicles[i];
    out[i].before = v;
    if (!v.active) {
      out[i].after = v;
      continue;
    }
    out[i].acted = true;
    VehicleState next = bicycle_step(v, actions[i], config_.dt, config_.vehicle);
    const Route& route = route_of(i);
    const double reach = std::abs(next.speed) * config_.dt + 1.0;
    next.route_progress = route.project(next.position, v.route_progress - reach, v.route_progress + reach).s;
    next.off_road = footprint_off_road(next);
    next.in_contact = false;
    v = next;
  }
  ++state_.step;

  const auto collisions = detect_collisions();
  state_.contacts.clear();
  for (const auto& e : collisions) {
    state_.contacts.insert({e.i, e.j});
    state_.vehicles[e.i].in_contact = true;
    state_.vehicles[e.j].in_contact = true;
    out[e.i].contacts.push_back(e.j);
    out[e.j].contacts.push_back(e.i);
    state_.event_log.push_back({EventKind::kCollision, state_.step, e.i, e.j, e.contact_point, e.onset});
  }

  bool all_arrived = true;
  for (int i = 0; i < num_agents(); ++i) {
    VehicleState& v = state_.vehicles[i];
    if (!out[i].acted) {
      all_arrived = all_arrived && v.arrived;
      continue;
    }
    if (v.off_road) state_.event_log.push_back({EventKind::kOffRoad, state_.step, i, -1, v.position, false});
    if (norm(v.position - route_of(i).end()) <= config_.arrival_radius) {
      v.arrived = true;
      v.active = false;
      out[i].arrived_now = true;
      state_.event_log.push_back({EventKind::kArrival, state_.step, i, -1, v.position, true});
    }
    all_arrived = all_arrived && v.arrived;
    out[i].after = v;
  }
  state_.done = all_arrived || state_.step >= config_.max_steps;
  return out;
}

LidarScan World::lidar_scan(int agent) const {
  const VehicleState& self = state_.vehicles.at(agent);
  if (!self.active) throw std::invalid_argument("lidar_scan: agent " + std::to_string(agent) + " is inactive");

  const double range = config_.lidar.range;
  const double reach = std::hypot(config_.vehicle.length, config_.vehicle.width) / 2.0;
  std::vector<OrientedBox> nearby;
  for (int j = 0; j < num_agents(); ++j) {
    const VehicleState& o = state_.vehicles[j];
    if (j == agent || !o.active) continue;
    if (norm(o.position - self.position) - reach > range) continue;
    nearby.push_back(footprint(o, config_.vehicle));
  }

  LidarScan scan;
  scan.range = range;
  scan.distances.resize(config_.lidar.rays);
  for (int k = 0; k < config_.lidar.rays; ++k) {
    const Vec2 dir = unit(self.heading + ray_angle(config_.lidar, k));
    double best = range;
    for (const OrientedBox& box : nearby) {
      if (auto t = ray_box_distance(self.position, dir, box)) best = std::min(best, *t);
    }
    for (const Segment2& seg : map_->boundaries()) {
      if (auto t = ray_segment_distance(self.position, dir, seg.a, seg.b)) best = std::min(best, *t);
    }
    scan.distances[k] = std::clamp(best / range, 0.0, 1.0);
  }
  return scan;
}

double World::lateral_offset(int agent) const {
  const VehicleState& v = state_.vehicles.at(agent);
  const Route& route = route_of(agent);
  return cross(route.tangent_at(v.route_progress), v.position - route.point_at(v.route_progress));
}

std::vector<double> World::observe(int agent) const { return observe(agent, lidar_scan(agent)); }

std::vector<double> World::observe(int agent, const LidarScan& scan) const {
  const VehicleState& v = state_.vehicles.at(agent);
  if (!v.active) throw std::invalid_argument("observe: agent " + std::to_string(agent) + " is inactive");
  const Route& route = route_of(agent);

  std::vector<double> obs;
  obs.reserve(observation_size());
  const double heading_error = wrap_angle(v.heading - route.heading_at(v.route_progress));
  obs.push_back(v.speed / config_.vehicle.max_speed);
  obs.push_back(std::cos(heading_error));
  obs.push_back(std::sin(heading_error));
  obs.push_back(lateral_offset(agent) / config_.map.lane_width);
  obs.push_back(v.last_action.steer);
  obs.push_back(v.last_action.throttle);

  const double spacing = config_.checkpoint_spacing;
  const double next_index = std::floor(v.route_progress / spacing) + 1.0;
  for (int k = 0; k < 2; ++k) {
    const Vec2 cp = route.point_at((next_index + k) * spacing);
    const Vec2 rel = rotate(cp - v.position, -v.heading);
    obs.push_back(rel.x / config_.nav_scale);
    obs.push_back(rel.y / config_.nav_scale);
  }
  obs.push_back(std::max(0.0, route.length() - v.route_progress) / route.length());

  obs.insert(obs.end(), scan.distances.begin(), scan.distances.end());
  return obs;
}

namespace {

nlohmann::ordered_json to_json(const VehicleState& v) {
  return {{"x", v.position.x},
          {"y", v.position.y},
          {"heading", v.heading},
          {"speed", v.speed},
          {"route_progress", v.route_progress},
          {"steer", v.last_action.steer},
          {"throttle", v.last_action.throttle},
          {"in_contact", v.in_contact},
          {"off_road", v.off_road},
          {"arrived", v.arrived},
          {"active", v.active}};
}

const char* kind_name(EventKind k) {
  switch (k) {
    case EventKind::kCollision:
      return "collision";
    case EventKind::kOffRoad:
      return "off_road";
    case EventKind::kArrival:
      return "arrival";
  }
  return "?";
}

}  // namespace

std::string World::serialize() const {
  nlohmann::ordered_json j;
  j["step"] = state_.step;
  j["done"] = state_.done;
  std::ostringstream rng;
  rng << state_.rng;
  j["rng"] = rng.str();
  auto& vs = j["vehicles"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < state_.vehicles.size(); ++i) {
    auto v = to_json(state_.vehicles[i]);
    v["route"] = state_.route_ids[i];
    vs.push_back(std::move(v));
  }
  auto& cs = j["contacts"] = nlohmann::ordered_json::array();
  for (const auto& [a, b] : state_.contacts) cs.push_back({a, b});
  auto& ev = j["events"] = nlohmann::ordered_json::array();
  for (const WorldEvent& e : state_.event_log) {
    ev.push_back({{"kind", kind_name(e.kind)},
                  {"step", e.step},
                  {"agent", e.agent},
                  {"other", e.other},
                  {"x", e.point.x},
                  {"y", e.point.y},
                  {"onset", e.onset}});
  }
  return j.dump();
}

}  // namespace junction::sim
