#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace junction::runtime {

/// Joint observations of every agent active at one step, used to rebuild
/// CTCE pooling groups on the learner.
struct PeerStep {
  std::vector<int> agents;  // ascending
  std::vector<double> obs;  // agents.size() x obs_dim, row per agent
  std::vector<std::array<double, 2>> positions;
};

/// Shared by all segments emitted from one collect call.
struct PeerTable {
  std::uint64_t collect_id = 0;
  std::vector<PeerStep> steps;
};

/// One agent's `horizon` consecutive steps. Steps where the agent was not
/// active (arrived and waiting for the episode to end) have valid = 0,
/// done = 1 and zero payload.
struct TrajectorySegment {
  int agent_id = 0;
  int env_id = 0;
  int horizon = 0;
  int obs_dim = 0;
  int action_dim = 2;
  std::uint64_t model_version = 0;
  std::uint64_t collect_id = 0;

  std::vector<double> observations;  // horizon x obs_dim
  std::vector<double> actions;       // horizon x action_dim
  std::vector<double> pre_tanh;      // horizon x action_dim, the samples behind `actions`
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> dones;
  std::vector<std::uint8_t> valid;

  double bootstrap_value = 0.0;
  std::vector<double> bootstrap_observation;  // observation after the last step, zeros if inactive

  std::shared_ptr<const PeerTable> peers;  // CTCE only

  /// Throws std::invalid_argument describing the defect.
  void validate() const;
  int num_valid() const;
  const double* obs_at(int t) const { return observations.data() + static_cast<std::size_t>(t) * obs_dim; }
  /// Observation following step t: the next row, or the bootstrap observation after the last step.
  const double* next_obs_at(int t) const { return t + 1 < horizon ? obs_at(t + 1) : bootstrap_observation.data(); }
};

using SegmentPtr = std::shared_ptr<const TrajectorySegment>;

/// Byte encoding of the agent-visible payload, for determinism checks and dumps.
std::string encode_segment(const TrajectorySegment& segment);

}  // namespace junction::runtime
