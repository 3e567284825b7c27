#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "junction/algos/hyperparams.hpp"
#include "junction/nn/layout.hpp"
#include "junction/rewards/rewards.hpp"
#include "junction/sim/world.hpp"

namespace junction::config {

struct RuntimeConfig {
  int actors = 1;
  int horizon = 32;
  int batch_segments = 64;
  int capacity = 256;  // queued segments (FIFO) or ring slots (replay)
  double max_avg_version_gap = 8.0;
  long long budget_updates = 100;
  double budget_seconds = 0.0;  // 0 disables the wall-clock budget
  bool deterministic = false;
  std::uint64_t seed = 1;
  // Off-policy learners.
  int warmup_transitions = 2000;
  int updates_per_round = 4;  // learner updates per actor round in deterministic mode
};

struct EvalConfig {
  int episodes = 100;
  std::uint64_t seed = 100000;
  int periodic_episodes = 5;
};

struct IoConfig {
  std::string out_dir = "runs/default";
  int checkpoint_every = 50;  // updates; 0 keeps only the final checkpoint
  int stats_every = 1;
  int eval_every = 0;  // updates; 0 disables periodic evaluation
  bool save_logs = true;
};

struct RunConfig {
  sim::SimConfig sim;
  rewards::RewardConfig rewards;
  nn::NetworkConfig network;  // obs_dim follows sim.lidar_rays
  algos::AlgoKind algo = algos::AlgoKind::kPPO;
  algos::Hyperparams hyper;
  RuntimeConfig runtime;
  EvalConfig eval;
  IoConfig io;

  /// Throws std::invalid_argument whose message starts with the offending key.
  void validate() const;
  /// "section.key = value" lines for every key, sorted by key.
  std::string canonical() const;
  /// FNV-1a of canonical(); independent of the order keys were written in.
  std::uint64_t hash() const;
};

/// Keys in "section.key" form with their documented defaults.
std::vector<std::pair<std::string, std::string>> documented_defaults();

/// Environment overrides: JUNCTION_<SECTION>__<KEY>=value, e.g.
/// JUNCTION_SIM__N_VEHICLES=4. Returned keyed by "section.key".
std::map<std::string, std::string> environment_overrides();

/// Sectioned key-value text. Absent keys take their defaults; `overrides`
/// are applied on top. Unknown keys, type mismatches and range violations
/// throw std::invalid_argument naming the key.
RunConfig parse_config(const std::string& text, const std::map<std::string, std::string>& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const std::map<std::string, std::string>& overrides = {});

/// Sets one key from its textual value; same errors as parse_config.
void set_key(RunConfig& config, const std::string& key, const std::string& value);

std::string hash_hex(std::uint64_t hash);

}  // namespace junction::config
