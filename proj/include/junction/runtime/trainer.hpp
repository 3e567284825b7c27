#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "junction/algos/ppo.hpp"
#include "junction/config/config.hpp"
#include "junction/nn/layout.hpp"
#include "junction/runtime/environment.hpp"

namespace junction::runtime {

struct RunStats {
  double wall_seconds = 0.0;
  long long env_steps = 0;
  double env_steps_per_sec = 0.0;
  long long produced = 0;
  long long consumed = 0;
  long long discarded = 0;
  long long queued = 0;
  double discard_fraction = 0.0;
  long long updates = 0;
  double updates_per_minute = 0.0;
  std::uint64_t version = 0;
  double last_batch_gap = 0.0;
  // Training episodes finished by the actors so far.
  long long episodes = 0;
  double episode_success = 0.0;  // mean arrived vehicles per episode
  double episode_crash_vehicle = 0.0;

  /// One-line JSON object.
  std::string to_json() const;
};

struct TrainHooks {
  std::function<void(const algos::UpdateStats&, const RunStats&)> on_update;
};

struct TrainResult {
  RunStats stats;
  nn::ModelParameters final_params;
  std::vector<algos::UpdateStats> history;
  std::filesystem::path final_checkpoint;  // empty when io.out_dir is empty
};

EnvConfig env_config(const config::RunConfig& config);

/// Spawns runtime.actors collectors and runs the learner loop until the
/// update or time budget is spent. Deterministic mode runs everything on the
/// calling thread, actors and learner taking turns. With a non-empty
/// io.out_dir, writes stats.jsonl, checkpoints/, eval.jsonl, final.ckpt,
/// config.ini and manifest.json there.
TrainResult run_training(const config::RunConfig& config, const TrainHooks& hooks = {});

struct ThroughputSample {
  int actors = 0;
  double seconds = 0.0;
  long long env_steps = 0;
  double env_steps_per_sec = 0.0;
};

/// Env steps per second of `actors` threads collecting continuously with a
/// fixed snapshot and no learner.
ThroughputSample measure_actor_throughput(const config::RunConfig& config, int actors, double seconds);

/// Deterministic 64-bit seed derivation.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace junction::runtime
