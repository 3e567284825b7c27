#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "junction/metrics/metrics.hpp"
#include "junction/nn/checkpoint.hpp"
#include "junction/nn/policy.hpp"
#include "junction/runtime/environment.hpp"

namespace junction::runtime {

struct EvalOptions {
  int episodes = 100;
  std::uint64_t base_seed = 100000;  // episode k uses base_seed + k
  std::filesystem::path log_dir;     // episode_<seed>.jsonl per episode when set
  std::uint64_t config_hash = 0;
};

/// Joint action for all agents of the environment's current state; entries
/// for inactive agents are ignored.
using JointPolicy = std::function<std::vector<sim::Action>(const Environment&)>;

/// Deterministic tanh(mean) actions from a policy network.
JointPolicy greedy_policy(const nn::PolicyNetwork& network);
/// The same scripted action for every agent.
JointPolicy constant_policy(sim::Action action);

/// Runs one episode to termination and returns its complete log.
metrics::TrajectoryLog run_episode(const JointPolicy& policy, const EnvConfig& env, std::uint64_t seed);

/// Per-episode metrics for seeds base_seed .. base_seed + episodes - 1.
std::vector<metrics::EpisodeMetrics> evaluate_episodes(const JointPolicy& policy, const EnvConfig& env,
                                                       const EvalOptions& options);
metrics::MetricsReport evaluate(const JointPolicy& policy, const EnvConfig& env, const EvalOptions& options);

/// Throws std::invalid_argument when the checkpoint's mode or layout (and
/// hence obs_dim) differs from `network`.
metrics::MetricsReport evaluate_checkpoint(const nn::Checkpoint& checkpoint, const nn::NetworkConfig& network,
                                           const EnvConfig& env, const EvalOptions& options);

}  // namespace junction::runtime
