#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "junction/algos/hyperparams.hpp"
#include "junction/nn/policy.hpp"
#include "junction/runtime/environment.hpp"
#include "junction/runtime/param_store.hpp"
#include "junction/runtime/segment.hpp"

namespace junction::runtime {

struct ActorOptions {
  int actor_id = 0;
  int horizon = 32;
  algos::AlgoKind algo = algos::AlgoKind::kPPO;
  double ddpg_noise = 0.1;
  std::uint64_t seed = 1;
};

/// Totals over episodes finished since the last take_tally().
struct EpisodeTally {
  long long episodes = 0;
  double success = 0.0;
  double crash_vehicle = 0.0;
  double out_of_road = 0.0;
  double agent_return = 0.0;  // summed per-agent mean returns
};

/// Owns one environment and a local copy of the policy. Each collect()
/// refreshes the copy from the given snapshot and steps the environment
/// `horizon` times, auto-resetting finished episodes.
class Actor {
 public:
  Actor(EnvConfig env, nn::NetworkConfig network, ActorOptions options);

  /// One segment per agent that was active at some step; all stamped with
  /// the snapshot's version.
  std::vector<TrajectorySegment> collect(const ParamsPtr& snapshot);

  long long env_steps() const { return env_steps_; }
  EpisodeTally take_tally();
  const Environment& env() const { return env_; }
  const ActorOptions& options() const { return options_; }

 private:
  struct Choice {
    nn::ActionVec action{};
    nn::ActionVec pre_tanh{};
    double log_prob = 0.0;
    double value = 0.0;
  };
  void load(const ParamsPtr& snapshot);
  nn::Matrix gather(const std::vector<int>& agents) const;
  std::shared_ptr<const nn::PoolingMatrix> pooling(const std::vector<int>& agents) const;
  std::vector<Choice> act(const std::vector<int>& agents);
  void start_episode();

  Environment env_;
  nn::PolicyNetwork net_;
  ActorOptions options_;
  std::mt19937_64 rng_;
  ParamsPtr loaded_;
  std::uint64_t collects_ = 0;
  long long env_steps_ = 0;
  EpisodeTally tally_;
  std::vector<double> episode_return_;
  double episode_contacts_ = 0.0, episode_off_road_ = 0.0, episode_arrived_ = 0.0;
};

}  // namespace junction::runtime
