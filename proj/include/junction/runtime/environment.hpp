#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "junction/metrics/trajectory_log.hpp"
#include "junction/rewards/rewards.hpp"
#include "junction/sim/world.hpp"

namespace junction::runtime {

struct EnvConfig {
  sim::SimConfig sim;
  rewards::RewardConfig rewards;
};

/// Simulator plus reward function with cached per-agent observations.
/// Optionally records a trajectory log of the current episode.
class Environment {
 public:
  explicit Environment(EnvConfig config, bool record = false);

  void reset(std::uint64_t episode_seed);

  struct StepResult {
    std::vector<rewards::RewardBreakdown> rewards;  // zero for agents that did not act
    std::vector<std::uint8_t> acted;
    std::vector<std::uint8_t> arrived;
    bool episode_done = false;
  };
  StepResult step(const std::vector<sim::Action>& actions);

  const sim::World& world() const { return world_; }
  const EnvConfig& config() const { return config_; }
  int num_agents() const { return world_.num_agents(); }
  int obs_dim() const { return world_.observation_size(); }
  bool active(int agent) const { return world_.state().vehicles.at(agent).active; }
  bool episode_done() const { return world_.done(); }
  std::uint64_t episode_seed() const { return seed_; }
  /// Observation of an active agent at the current state.
  const std::vector<double>& observation(int agent) const;
  std::vector<int> active_agents() const;

  /// Log of the current episode; complete once the episode is done.
  const metrics::TrajectoryLog& log() const { return log_; }

 private:
  void refresh_observations();

  EnvConfig config_;
  std::shared_ptr<const sim::MapGeometry> map_;
  sim::World world_;
  std::uint64_t seed_ = 0;
  bool record_ = false;
  std::vector<std::optional<sim::LidarScan>> scans_;
  std::vector<std::vector<double>> obs_;
  metrics::TrajectoryLog log_;
};

}  // namespace junction::runtime
