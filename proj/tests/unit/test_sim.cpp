#include <doctest.h>

#include <cmath>
#include <random>

#include "junction/sim/world.hpp"

using namespace junction::sim;

namespace {

int find_route(const MapGeometry& map, int arm, int lane, Turn turn) {
  for (std::size_t i = 0; i < map.routes().size(); ++i) {
    const Route& r = map.routes()[i];
    if (r.entry_arm() == arm && r.entry_lane() == lane && r.turn() == turn) return static_cast<int>(i);
  }
  return -1;
}

VehicleState at_route(const MapGeometry& map, int route_id, double s) {
  const Route& r = map.routes()[route_id];
  VehicleState v;
  v.route_progress = s;
  v.position = r.point_at(s);
  v.heading = r.heading_at(s);
  return v;
}

/// Simple pure-pursuit style controller used to drive scripted routes in tests.
Action follow(const World& w, int agent, double target_speed) {
  const auto obs = w.observe(agent);
  const double speed = obs[0] * w.config().vehicle.max_speed;
  const double throttle = std::clamp(0.5 * (target_speed - speed), -1.0, 1.0);
  const double heading_err = std::atan2(obs[2], obs[1]);
  const double lateral = obs[3] * w.config().map.lane_width;
  const double steer = std::clamp(-1.5 * heading_err - 0.4 * lateral, -1.0, 1.0);
  return {steer, throttle};
}

SimConfig open_config() {
  SimConfig c;
  c.map.lane_width = 40.0;
  c.map.lanes_per_arm = 1;
  c.map.arm_length = 100.0;
  c.n_vehicles = 1;
  return c;
}

}  // namespace

TEST_CASE("map geometry at defaults") {
  MapGeometry map;
  CHECK(map.conflict_zone_side() == doctest::Approx(14.0));
  CHECK(map.routes().size() == 24);
  for (const Route& r : map.routes()) {
    CHECK(r.exit_arm() != r.entry_arm());
    CHECK(std::abs(norm(r.points().front()) - map.road_end()) < 6.0);
    CHECK(std::abs(norm(r.end()) - map.road_end()) < 6.0);
    for (double s = 0.0; s <= r.length(); s += 0.25) CHECK(map.on_drivable(r.point_at(s)));
  }
}

TEST_CASE("turn routes are tangent-continuous") {
  MapGeometry map;
  for (const Route& r : map.routes()) {
    for (double s = 0.5; s < r.length() - 0.5; s += 0.5) {
      const double dh = wrap_angle(r.heading_at(s + 0.5) - r.heading_at(s));
      CHECK(std::abs(dh) < 0.2);
    }
  }
}

TEST_CASE("conflict zone is a closed square") {
  MapGeometry map;
  CHECK(map.in_conflict_zone({0, 0}));
  CHECK_FALSE(map.in_conflict_zone({50, 0}));
  CHECK(map.in_conflict_zone({7, 0}));
  CHECK(map.in_conflict_zone({7, -7}));
  CHECK_FALSE(map.in_conflict_zone({7.0001, 0}));
}

TEST_CASE("bicycle_step examples") {
  VehicleState s;
  s.speed = 5.0;
  auto coast = bicycle_step(s, {0.0, 0.0}, 0.1);
  CHECK(coast.speed == doctest::Approx(5.0));
  CHECK(coast.position.x == doctest::Approx(0.5));
  CHECK(coast.heading == doctest::Approx(0.0));

  auto accel = bicycle_step(s, {0.0, 1.0}, 0.1);
  CHECK(accel.speed == doctest::Approx(5.2));
  CHECK(accel.position.x == doctest::Approx(0.52));

  auto turn = bicycle_step(s, {1.0, 1.0}, 0.1);
  CHECK(turn.heading == doctest::Approx(0.17519).epsilon(1e-4));
  CHECK(turn.heading == doctest::Approx(5.2 / 2.5 * std::tan(0.7) * 0.1));
}

TEST_CASE("braking floors at zero and reverse starts from standstill") {
  VehicleState s;
  s.speed = 0.2;
  auto b = bicycle_step(s, {0.0, -1.0}, 0.1);
  CHECK(b.speed == 0.0);
  auto r = bicycle_step(b, {0.0, -1.0}, 0.1);
  CHECK(r.speed == doctest::Approx(-0.2));
  CHECK(r.position.x < 0.0);
}

TEST_CASE("actions are clamped and speeds stay in bounds") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> a(-3.0, 3.0);
  VehicleState s;
  for (int i = 0; i < 5000; ++i) {
    s = bicycle_step(s, {a(rng), a(rng)}, 0.1);
    REQUIRE(s.speed <= 10.0);
    REQUIRE(s.speed >= -2.0);
    REQUIRE(std::abs(s.last_action.steer) <= 1.0);
    REQUIRE(std::abs(s.last_action.throttle) <= 1.0);
  }
}

TEST_CASE("reset spawns queued vehicles") {
  SimConfig cfg;
  World w = World::reset(cfg, 7);
  CHECK(w.num_agents() == 40);
  CHECK(w.num_active() == 40);
  CHECK(w.detect_collisions().empty());
  CHECK(w.state().step == 0);
  for (const auto& v : w.state().vehicles) {
    CHECK(v.speed == 0.0);
    CHECK(std::abs(wrap_angle(v.heading - w.route_of(&v - w.state().vehicles.data()).heading_at(v.route_progress))) <
          1e-9);
  }

  cfg.n_vehicles = 1;
  World one = World::reset(cfg, 0);
  REQUIRE(one.num_agents() == 1);
  const auto& v = one.state().vehicles[0];
  CHECK(v.speed == 0.0);
  CHECK(v.position.x == doctest::Approx(17.0));
  CHECK(v.position.y == doctest::Approx(1.75));
}

TEST_CASE("reset is deterministic and rejects overfull arms") {
  SimConfig cfg;
  CHECK(World::reset(cfg, 99).serialize() == World::reset(cfg, 99).serialize());
  CHECK(World::reset(cfg, 99).serialize() != World::reset(cfg, 100).serialize());
  cfg.n_vehicles = 41;
  CHECK_THROWS_AS(World::reset(cfg, 0), std::invalid_argument);
  cfg.n_vehicles = 0;
  CHECK_THROWS_AS(World::reset(cfg, 0), std::invalid_argument);
}

TEST_CASE("zero actions from standstill change only the step counter") {
  SimConfig cfg;
  cfg.n_vehicles = 8;
  World w = World::reset(cfg, 1);
  const auto before = w.state().vehicles;
  std::vector<Action> zero(8);
  w.step(zero);
  CHECK(w.state().step == 1);
  CHECK(w.state().vehicles == before);
}

TEST_CASE("step rejects mismatched action counts") {
  SimConfig cfg;
  cfg.n_vehicles = 4;
  World w = World::reset(cfg, 1);
  std::vector<Action> three(3);
  CHECK_THROWS_AS(w.step(three), std::invalid_argument);
}

TEST_CASE("single vehicle on a straight route arrives under full throttle") {
  SimConfig cfg;
  cfg.n_vehicles = 1;
  MapGeometry map;
  const int rid = find_route(map, 0, 0, Turn::kStraight);
  World w = World::from_vehicles(cfg, {at_route(map, rid, 50.0)}, {rid});
  int steps = 0;
  while (!w.done()) {
    std::vector<Action> a{{0.0, 1.0}};
    w.step(a);
    ++steps;
  }
  CHECK(w.state().vehicles[0].arrived);
  CHECK_FALSE(w.state().vehicles[0].active);
  CHECK(steps < cfg.max_steps);
}

TEST_CASE("turning routes can be driven to arrival") {
  SimConfig cfg;
  cfg.n_vehicles = 1;
  MapGeometry map;
  for (Turn t : {Turn::kLeft, Turn::kRight}) {
    for (int lane = 0; lane < 2; ++lane) {
      const int rid = find_route(map, 1, lane, t);
      World w = World::from_vehicles(cfg, {at_route(map, rid, 50.0)}, {rid});
      bool off = false;
      while (!w.done()) {
        std::vector<Action> a{follow(w, 0, 5.0)};
        w.step(a);
        off = off || w.state().vehicles[0].off_road;
      }
      CHECK(w.state().vehicles[0].arrived);
      CHECK_FALSE(off);
    }
  }
}

TEST_CASE("overlapping vehicles contact with a single onset") {
  SimConfig cfg;
  cfg.n_vehicles = 2;
  MapGeometry map;
  const int rid = find_route(map, 0, 0, Turn::kStraight);
  World w = World::from_vehicles(cfg, {at_route(map, rid, 40.0), at_route(map, rid, 41.0)}, {rid, rid});
  std::vector<Action> zero(2);
  w.step(zero);
  CHECK(w.state().vehicles[0].in_contact);
  CHECK(w.state().vehicles[1].in_contact);
  w.step(zero);
  int onsets = 0, collisions = 0;
  for (const auto& e : w.state().event_log) {
    if (e.kind == EventKind::kCollision) {
      ++collisions;
      onsets += e.onset;
      CHECK(e.agent < e.other);
    }
  }
  CHECK(collisions == 2);
  CHECK(onsets == 1);
}

TEST_CASE("arrived vehicles leave collisions and lidar") {
  SimConfig cfg;
  cfg.n_vehicles = 2;
  MapGeometry map;
  const int rid = find_route(map, 0, 0, Turn::kStraight);
  const Route& r = map.routes()[rid];
  auto v0 = at_route(map, rid, r.length() - 3.0);
  auto v1 = at_route(map, rid, r.length() - 8.0);
  World w = World::from_vehicles(cfg, {v0, v1}, {rid, rid});
  std::vector<Action> zero(2);
  w.step(zero);
  CHECK(w.state().vehicles[0].arrived);
  for (int k = 0; k < 20; ++k) {
    if (w.done()) break;
    std::vector<Action> push{{0.0, 0.0}, {0.0, 1.0}};
    w.step(push);
    CHECK(w.state().vehicles[0].arrived);
    if (w.state().vehicles[1].active) {
      const auto scan = w.lidar_scan(1);
      CHECK(scan.distances[0] == doctest::Approx(1.0));
    }
  }
  for (const auto& e : w.state().event_log) CHECK(e.kind != EventKind::kCollision);
  CHECK_THROWS_AS(w.lidar_scan(0), std::invalid_argument);
  CHECK_THROWS_AS(w.observe(0), std::invalid_argument);
}

TEST_CASE("lidar in an open interior sees nothing") {
  SimConfig cfg = open_config();
  MapGeometry map(cfg.map);
  const int rid = find_route(map, 0, 0, Turn::kStraight);
  VehicleState v;
  v.position = {0, 0};
  World w = World::from_vehicles(cfg, {v}, {rid});
  const auto scan = w.lidar_scan(0);
  REQUIRE(scan.distances.size() == 72);
  for (double d : scan.distances) CHECK(d == 1.0);
}

TEST_CASE("lidar sees obstacles ahead and behind") {
  SimConfig cfg = open_config();
  cfg.n_vehicles = 2;
  MapGeometry map(cfg.map);
  const int rid = find_route(map, 0, 0, Turn::kStraight);
  VehicleState ego, other;
  ego.position = {0, 0};
  other.position = {10, 0};
  World ahead = World::from_vehicles(cfg, {ego, other}, {rid, rid});
  auto scan = ahead.lidar_scan(0);
  CHECK(scan.distances[0] == doctest::Approx(7.75 / 50.0));
  CHECK(scan.distances[36] == 1.0);

  other.position = {-10, 0};
  World behind = World::from_vehicles(cfg, {ego, other}, {rid, rid});
  scan = behind.lidar_scan(0);
  CHECK(scan.distances[0] == 1.0);
  CHECK(scan.distances[36] == doctest::Approx(7.75 / 50.0));

  // Rays rotate with heading: face north, obstacle north.
  ego.heading = kPi / 2;
  other.position = {0, 10};
  World north = World::from_vehicles(cfg, {ego, other}, {rid, rid});
  scan = north.lidar_scan(0);
  CHECK(scan.distances[0] == doctest::Approx(9.0 / 50.0));
}

TEST_CASE("lidar is monotone as an obstacle approaches along a ray") {
  SimConfig cfg = open_config();
  cfg.n_vehicles = 2;
  MapGeometry map(cfg.map);
  const int rid = find_route(map, 0, 0, Turn::kStraight);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int trial = 0; trial < 50; ++trial) {
    const int ray = static_cast<int>(rng() % 72);
    const double bearing = ray_angle(cfg.lidar, ray);
    const double obstacle_heading = ang(rng);
    double prev = 2.0;
    for (double dist = 45.0; dist >= 4.0; dist -= 1.0) {
      VehicleState ego, other;
      other.position = unit(bearing) * dist;
      other.heading = obstacle_heading;
      World w = World::from_vehicles(cfg, {ego, other}, {rid, rid});
      const double v = w.lidar_scan(0).distances[ray];
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("observation layout") {
  SimConfig cfg;
  cfg.n_vehicles = 1;
  World w = World::reset(cfg, 0);
  auto obs = w.observe(0);
  REQUIRE(obs.size() == 83);
  CHECK(w.observation_size() == 83);
  CHECK(obs[0] == 0.0);
  CHECK(obs[1] == doctest::Approx(1.0));
  CHECK(obs[2] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(obs[3] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(obs[4] == 0.0);
  CHECK(obs[5] == 0.0);
  for (double x : obs) CHECK(std::isfinite(x));

  auto& v = w.mutable_state().vehicles[0];
  v.speed = 10.0;
  v.last_action = {0.25, -0.5};
  obs = w.observe(0);
  CHECK(obs[0] == 1.0);
  CHECK(obs[4] == 0.25);
  CHECK(obs[5] == -0.5);
  // Checkpoints lie ahead of a vehicle aligned with its lane.
  CHECK(obs[6] > 0.0);
  CHECK(obs[8] > obs[6]);
  CHECK(obs[10] > 0.0);
  CHECK(obs[10] < 1.0);
}

TEST_CASE("identical seeds and actions replay bit-identically") {
  SimConfig cfg;
  cfg.n_vehicles = 12;
  auto run = [&] {
    World w = World::reset(cfg, 21);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> a(-1.0, 1.0);
    while (!w.done()) {
      std::vector<Action> acts(w.num_agents());
      for (auto& x : acts) x = {a(rng) * 0.3, a(rng) * 0.5 + 0.5};
      w.step(acts);
    }
    return w.serialize();
  };
  CHECK(run() == run());
}
