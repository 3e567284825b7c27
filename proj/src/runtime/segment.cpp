#include "junction/runtime/segment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace junction::runtime {

void TrajectorySegment::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("segment: " + what); };
  if (horizon < 1) fail("horizon must be >= 1");
  if (obs_dim < 1 || action_dim < 1) fail("bad dimensions");
  const auto h = static_cast<std::size_t>(horizon);
  if (observations.size() != h * obs_dim) fail("observations length != horizon x obs_dim");
  if (actions.size() != h * action_dim) fail("actions length != horizon x action_dim");
  if (pre_tanh.size() != h * action_dim) fail("pre_tanh length != horizon x action_dim");
  if (log_probs.size() != h || rewards.size() != h || values.size() != h || dones.size() != h || valid.size() != h) {
    fail("per-step arrays must be exactly horizon long");
  }
  if (bootstrap_observation.size() != static_cast<std::size_t>(obs_dim)) fail("bootstrap observation length");
  auto finite = [](const std::vector<double>& v) { return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); }); };
  if (!finite(observations) || !finite(actions) || !finite(pre_tanh) || !finite(log_probs) || !finite(rewards) || !finite(values) ||
      !std::isfinite(bootstrap_value)) {
    fail("non-finite value");
  }
  if (peers && peers->steps.size() != h) fail("peer table length != horizon");
}

int TrajectorySegment::num_valid() const {
  return static_cast<int>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

namespace {

template <typename T>
void append(std::string& out, const T& v) {
  const auto* p = reinterpret_cast<const char*>(&v);
  out.append(p, sizeof(T));
}

template <typename T>
void append_vec(std::string& out, const std::vector<T>& v) {
  append(out, static_cast<std::uint64_t>(v.size()));
  out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(T));
}

}  // namespace

std::string encode_segment(const TrajectorySegment& s) {
  std::string out;
  append(out, s.agent_id);
  append(out, s.env_id);
  append(out, s.horizon);
  append(out, s.obs_dim);
  append(out, s.model_version);
  append_vec(out, s.observations);
  append_vec(out, s.actions);
  append_vec(out, s.pre_tanh);
  append_vec(out, s.log_probs);
  append_vec(out, s.rewards);
  append_vec(out, s.values);
  append_vec(out, s.dones);
  append_vec(out, s.valid);
  append(out, s.bootstrap_value);
  append_vec(out, s.bootstrap_observation);
  return out;
}

}  // namespace junction::runtime
