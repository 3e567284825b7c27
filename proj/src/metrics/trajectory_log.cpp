#include "junction/metrics/trajectory_log.hpp"

#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace junction::metrics {

using nlohmann::ordered_json;

namespace {

void fail(const std::string& what) { throw std::invalid_argument("trajectory log: " + what); }

ordered_json reward_json(const rewards::RewardBreakdown& r) {
  return {{"progress", r.progress},
          {"speed", r.speed},
          {"arrival", r.arrival},
          {"crash", r.crash_penalty},
          {"out_of_road", r.out_of_road_penalty},
          {"safe_distance", r.safe_distance_penalty},
          {"right_of_way", r.right_of_way_adjustment},
          {"total", r.total}};
}

rewards::RewardBreakdown reward_from(const ordered_json& j) {
  rewards::RewardBreakdown r;
  r.progress = j.at("progress");
  r.speed = j.at("speed");
  r.arrival = j.at("arrival");
  r.crash_penalty = j.at("crash");
  r.out_of_road_penalty = j.at("out_of_road");
  r.safe_distance_penalty = j.at("safe_distance");
  r.right_of_way_adjustment = j.at("right_of_way");
  r.total = j.at("total");
  return r;
}

}  // namespace

void TrajectoryLog::validate() const {
  if (!complete) fail("incomplete (no end record)");
  if (header.n_vehicles < 1) fail("n_vehicles must be >= 1");
  if (!(header.dt > 0.0)) fail("dt must be > 0");
  if (episode_steps < 0 || episode_steps > header.max_steps) fail("episode_steps outside [0, max_steps]");
  std::vector<int> arrived_at(header.n_vehicles, 0);
  for (std::size_t k = 0; k < records.size(); ++k) {
    const AgentRecord& r = records[k];
    const std::string where = "record " + std::to_string(k);
    if (r.step < 1 || r.step > episode_steps) fail(where + ": step outside [1, episode_steps]");
    if (r.agent < 0 || r.agent >= header.n_vehicles) fail(where + ": agent id out of range");
    if (k > 0) {
      const AgentRecord& p = records[k - 1];
      if (r.step < p.step || (r.step == p.step && r.agent <= p.agent)) fail(where + ": not ordered by (step, agent)");
    }
    if (arrived_at[r.agent] != 0) fail(where + ": agent recorded after arrival");
    if (r.arrived) arrived_at[r.agent] = r.step;
    if (r.has_lidar && (r.lidar_mean < 0.0 || r.lidar_mean > 1.0 || r.front_min < 0.0 || r.front_min > 1.0)) {
      fail(where + ": lidar value outside [0, 1]");
    }
  }
  for (const CollisionRecord& c : collisions) {
    if (c.step < 1 || c.step > episode_steps) fail("collision step outside [1, episode_steps]");
    if (c.i < 0 || c.j <= c.i || c.j >= header.n_vehicles) fail("collision pair ids invalid");
  }
}

void write_log(const TrajectoryLog& log, std::ostream& out) {
  const LogHeader& h = log.header;
  ordered_json head = {{"type", "header"},
                       {"seed", h.seed},
                       {"n_vehicles", h.n_vehicles},
                       {"dt", h.dt},
                       {"max_steps", h.max_steps},
                       {"arm_length", h.map.arm_length},
                       {"lane_width", h.map.lane_width},
                       {"lanes_per_arm", h.map.lanes_per_arm},
                       {"corner_radius", h.map.corner_radius},
                       {"vehicle_length", h.vehicle_length},
                       {"vehicle_width", h.vehicle_width},
                       {"lidar_rays", h.lidar_rays},
                       {"lidar_range", h.lidar_range},
                       {"front_sector_rays", h.front_sector_rays}};
  out << head.dump() << '\n';

  std::size_t c = 0;
  auto flush_collisions = [&](int upto) {
    for (; c < log.collisions.size() && log.collisions[c].step <= upto; ++c) {
      const CollisionRecord& e = log.collisions[c];
      out << ordered_json{{"type", "collision"}, {"step", e.step}, {"i", e.i}, {"j", e.j},
                          {"x", e.x},           {"y", e.y},       {"onset", e.onset}}
                 .dump()
          << '\n';
    }
  };
  for (const AgentRecord& r : log.records) {
    flush_collisions(r.step - 1);
    ordered_json j = {{"type", "agent"},
                      {"step", r.step},
                      {"agent", r.agent},
                      {"x", r.x},
                      {"y", r.y},
                      {"heading", r.heading},
                      {"speed", r.speed},
                      {"prev_speed", r.prev_speed},
                      {"steer", r.steer},
                      {"throttle", r.throttle},
                      {"route_progress", r.route_progress},
                      {"in_contact", r.in_contact},
                      {"off_road", r.off_road},
                      {"arrived", r.arrived}};
    if (r.has_lidar) {
      j["lidar_mean"] = r.lidar_mean;
      j["front_min"] = r.front_min;
    }
    j["reward"] = reward_json(r.reward);
    out << j.dump() << '\n';
  }
  flush_collisions(log.episode_steps > 0 ? log.episode_steps : std::numeric_limits<int>::max());
  if (log.complete) out << ordered_json{{"type", "end"}, {"episode_steps", log.episode_steps}}.dump() << '\n';
}

TrajectoryLog read_log(std::istream& in) {
  TrajectoryLog log;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = ordered_json::parse(line);
      const std::string type = j.at("type");
      if (log.complete) fail("record after end");
      if (type == "header") {
        LogHeader& h = log.header;
        h.seed = j.at("seed");
        h.n_vehicles = j.at("n_vehicles");
        h.dt = j.at("dt");
        h.max_steps = j.at("max_steps");
        h.map.arm_length = j.at("arm_length");
        h.map.lane_width = j.at("lane_width");
        h.map.lanes_per_arm = j.at("lanes_per_arm");
        h.map.corner_radius = j.at("corner_radius");
        h.vehicle_length = j.at("vehicle_length");
        h.vehicle_width = j.at("vehicle_width");
        h.lidar_rays = j.at("lidar_rays");
        h.lidar_range = j.at("lidar_range");
        h.front_sector_rays = j.at("front_sector_rays");
        have_header = true;
      } else if (!have_header) {
        fail("first record must be the header");
      } else if (type == "agent") {
        AgentRecord r;
        r.step = j.at("step");
        r.agent = j.at("agent");
        r.x = j.at("x");
        r.y = j.at("y");
        r.heading = j.at("heading");
        r.speed = j.at("speed");
        r.prev_speed = j.at("prev_speed");
        r.steer = j.at("steer");
        r.throttle = j.at("throttle");
        r.route_progress = j.at("route_progress");
        r.in_contact = j.at("in_contact");
        r.off_road = j.at("off_road");
        r.arrived = j.at("arrived");
        if (j.contains("lidar_mean")) {
          r.has_lidar = true;
          r.lidar_mean = j.at("lidar_mean");
          r.front_min = j.at("front_min");
        }
        r.reward = reward_from(j.at("reward"));
        log.records.push_back(r);
      } else if (type == "collision") {
        log.collisions.push_back({j.at("step"), j.at("i"), j.at("j"), j.at("x"), j.at("y"), j.at("onset")});
      } else if (type == "end") {
        log.episode_steps = j.at("episode_steps");
        log.complete = true;
      } else {
        fail("unknown record type '" + type + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      fail("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_header) fail("missing header");
  return log;
}

void save_log(const std::filesystem::path& path, const TrajectoryLog& log) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  write_log(log, f);
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

TrajectoryLog load_log(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  return read_log(f);
}

}  // namespace junction::metrics
