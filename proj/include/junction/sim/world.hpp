#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "junction/sim/geometry.hpp"
#include "junction/sim/map.hpp"
#include "junction/sim/vehicle.hpp"

namespace junction::sim {

struct LidarConfig {
  int rays = 72;
  double range = 50.0;
};

struct SimConfig {
  MapConfig map;
  VehicleParams vehicle;
  LidarConfig lidar;
  int n_vehicles = 40;
  double dt = 0.1;
  int max_steps = 1000;
  double spawn_headway = 10.0;
  /// Distance from the conflict-zone edge to the center of the first queued vehicle.
  double first_slot_gap = 10.0;
  double arrival_radius = 4.0;
  double checkpoint_spacing = 5.0;
  double nav_scale = 50.0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct LidarScan {
  std::vector<double> distances;  // normalized to [0, 1]
  double range = 50.0;

  double meters(std::size_t ray) const { return distances[ray] * range; }
};

struct CollisionEvent {
  int i = 0;  // i < j
  int j = 0;
  Vec2 contact_point;
  int step = 0;
  bool onset = false;

  bool operator==(const CollisionEvent&) const = default;
};

enum class EventKind : std::uint8_t { kCollision, kOffRoad, kArrival };

/// One entry of the append-only world event log.
struct WorldEvent {
  EventKind kind = EventKind::kCollision;
  int step = 0;
  int agent = 0;
  int other = -1;
  Vec2 point;
  bool onset = false;

  bool operator==(const WorldEvent&) const = default;
};

struct WorldState {
  std::vector<VehicleState> vehicles;
  std::vector<int> route_ids;
  int step = 0;
  bool done = false;
  std::mt19937_64 rng;
  std::vector<WorldEvent> event_log;
  /// Pairs (i < j) in contact at the end of the previous step.
  std::set<std::pair<int, int>> contacts;
};

/// Per-agent result of one world step.
struct StepOutcome {
  bool acted = false;  // agent was active at the start of the step
  VehicleState before;
  VehicleState after;
  bool arrived_now = false;
  std::vector<int> contacts;  // other agents overlapping this step
};

class World {
 public:
  /// Spawns `config.n_vehicles` queued on the entry lanes with routes assigned
  /// round-robin over a seeded shuffle of each lane's legal exits.
  static World reset(const SimConfig& config, std::uint64_t seed);
  /// Same as reset() but reuses an existing map instance.
  static World reset(const SimConfig& config, std::shared_ptr<const MapGeometry> map, std::uint64_t seed);

  /// Builds a world from explicit vehicle placements; used by tests and tools.
  static World from_vehicles(const SimConfig& config, std::vector<VehicleState> vehicles,
                             std::vector<int> route_ids);

  /// Advances every active vehicle by one tick. `actions` is indexed by agent
  /// id and must have one entry per vehicle; entries for inactive agents are
  /// ignored. Throws std::invalid_argument on a size mismatch and
  /// std::logic_error when the episode is already done.
  std::vector<StepOutcome> step(std::span<const Action> actions);

  /// All overlapping active pairs, with onset computed against the previous contact set.
  std::vector<CollisionEvent> detect_collisions() const;
  LidarScan lidar_scan(int agent) const;
  std::vector<double> observe(int agent) const;
  std::vector<double> observe(int agent, const LidarScan& scan) const;
  bool in_conflict_zone(Vec2 p) const { return map_->in_conflict_zone(p); }

  int observation_size() const { return 6 + 5 + config_.lidar.rays; }
  int num_agents() const { return static_cast<int>(state_.vehicles.size()); }
  int num_active() const;
  bool done() const { return state_.done; }

  const SimConfig& config() const { return config_; }
  const MapGeometry& map() const { return *map_; }
  std::shared_ptr<const MapGeometry> shared_map() const { return map_; }
  const WorldState& state() const { return state_; }
  WorldState& mutable_state() { return state_; }
  const Route& route_of(int agent) const { return map_->routes()[state_.route_ids.at(agent)]; }

  /// Signed lateral offset from the agent's route, positive to the left.
  double lateral_offset(int agent) const;

  /// Full state as canonical JSON text.
  std::string serialize() const;

 private:
  World(SimConfig config, std::shared_ptr<const MapGeometry> map);
  bool footprint_off_road(const VehicleState& v) const;

  SimConfig config_;
  std::shared_ptr<const MapGeometry> map_;
  WorldState state_;
};

/// Ray `k` points at heading + k * 360deg / rays.
double ray_angle(const LidarConfig& lidar, int ray);

}  // namespace junction::sim
