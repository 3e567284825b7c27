#include "junction/runtime/actor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "junction/algos/ddpg.hpp"
#include "junction/nn/distribution.hpp"

namespace junction::runtime {

Actor::Actor(EnvConfig env, nn::NetworkConfig network, ActorOptions options)
    : env_(std::move(env)), net_(std::move(network)), options_(options), rng_(options.seed) {
  if (options_.horizon < 1) throw std::invalid_argument("runtime.horizon: must be >= 1");
  if (net_.config().obs_dim != env_.obs_dim()) throw std::invalid_argument("network.obs_dim: does not match the simulator");
  start_episode();
}

void Actor::start_episode() {
  env_.reset(rng_());
  episode_return_.assign(env_.num_agents(), 0.0);
  episode_contacts_ = episode_off_road_ = episode_arrived_ = 0.0;
}

void Actor::load(const ParamsPtr& snapshot) {
  if (!snapshot) throw std::invalid_argument("collect: null parameter snapshot");
  if (snapshot == loaded_) return;
  net_.set_params(*snapshot);
  loaded_ = snapshot;
}

nn::Matrix Actor::gather(const std::vector<int>& agents) const {
  const int d = env_.obs_dim();
  nn::Matrix x(d, static_cast<Eigen::Index>(agents.size()));
  for (std::size_t k = 0; k < agents.size(); ++k) {
    x.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::VectorXd>(env_.observation(agents[k]).data(), d);
  }
  return x;
}

std::shared_ptr<const nn::PoolingMatrix> Actor::pooling(const std::vector<int>& agents) const {
  const double radius = net_.config().pooling_radius;
  if (net_.config().mode != nn::Mode::kCTCE || radius <= 0.0) return nullptr;
  std::vector<std::array<double, 2>> pos;
  for (int i : agents) {
    const auto& p = env_.world().state().vehicles[i].position;
    pos.push_back({p.x, p.y});
  }
  return std::make_shared<nn::PoolingMatrix>(nn::pooling_by_radius(pos, radius));
}

std::vector<Actor::Choice> Actor::act(const std::vector<int>& agents) {
  const auto fwd = net_.forward_batch(gather(agents), pooling(agents));
  const nn::ActionVec log_std{fwd.log_std[0], fwd.log_std[1]};
  std::vector<Choice> out(agents.size());
  for (std::size_t k = 0; k < agents.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(k);
    const nn::ActionVec mean{fwd.mean(0, j), fwd.mean(1, j)};
    out[k].value = fwd.value[j];
    if (options_.algo == algos::AlgoKind::kDDPG) {
      out[k].action = algos::ddpg_behavior_action(mean, options_.ddpg_noise, rng_);
      for (std::size_t d = 0; d < 2; ++d) {
        out[k].pre_tanh[d] = std::atanh(std::clamp(out[k].action[d], -1.0 + nn::kActionEps, 1.0 - nn::kActionEps));
      }
    } else {
      const nn::SampledAction s = nn::sample_action(mean, log_std, rng_);
      out[k].action = s.action;
      out[k].pre_tanh = s.pre_tanh;
      out[k].log_prob = s.log_prob;
    }
  }
  return out;
}

std::vector<TrajectorySegment> Actor::collect(const ParamsPtr& snapshot) {
  load(snapshot);
  const int n = env_.num_agents();
  const int d = env_.obs_dim();
  const int h = options_.horizon;
  const bool ctce = net_.config().mode == nn::Mode::kCTCE;
  const std::uint64_t collect_id = (static_cast<std::uint64_t>(options_.actor_id) << 32) | collects_++;

  std::vector<TrajectorySegment> segs(n);
  for (int i = 0; i < n; ++i) {
    TrajectorySegment& s = segs[i];
    s.agent_id = i;
    s.env_id = options_.actor_id;
    s.horizon = h;
    s.obs_dim = d;
    s.model_version = snapshot->version;
    s.collect_id = collect_id;
    s.observations.assign(static_cast<std::size_t>(h) * d, 0.0);
    s.actions.assign(static_cast<std::size_t>(h) * 2, 0.0);
    s.pre_tanh.assign(static_cast<std::size_t>(h) * 2, 0.0);
    s.log_probs.assign(h, 0.0);
    s.rewards.assign(h, 0.0);
    s.values.assign(h, 0.0);
    s.dones.assign(h, 1);
    s.valid.assign(h, 0);
    s.bootstrap_observation.assign(d, 0.0);
  }
  std::shared_ptr<PeerTable> peers;
  if (ctce) {
    peers = std::make_shared<PeerTable>();
    peers->collect_id = collect_id;
    peers->steps.resize(h);
  }

  std::vector<sim::Action> actions(n);
  for (int t = 0; t < h; ++t) {
    const std::vector<int> agents = env_.active_agents();
    if (agents.empty()) throw std::logic_error("collect: live episode without active agents");
    const std::vector<Choice> choices = act(agents);
    if (peers) {
      PeerStep& ps = peers->steps[t];
      ps.agents = agents;
      for (int i : agents) {
        const auto& o = env_.observation(i);
        ps.obs.insert(ps.obs.end(), o.begin(), o.end());
        const auto& p = env_.world().state().vehicles[i].position;
        ps.positions.push_back({p.x, p.y});
      }
    }
    std::fill(actions.begin(), actions.end(), sim::Action{});
    for (std::size_t k = 0; k < agents.size(); ++k) {
      const int i = agents[k];
      TrajectorySegment& s = segs[i];
      const auto& o = env_.observation(i);
      std::copy(o.begin(), o.end(), s.observations.begin() + static_cast<std::ptrdiff_t>(t) * d);
      s.actions[2 * t] = choices[k].action[0];
      s.actions[2 * t + 1] = choices[k].action[1];
      s.pre_tanh[2 * t] = choices[k].pre_tanh[0];
      s.pre_tanh[2 * t + 1] = choices[k].pre_tanh[1];
      s.log_probs[t] = choices[k].log_prob;
      s.values[t] = choices[k].value;
      s.valid[t] = 1;
      actions[i] = {choices[k].action[0], choices[k].action[1]};
    }

    Environment::StepResult r;
    try {
      r = env_.step(actions);
    } catch (const std::exception& e) {
      throw std::runtime_error("actor " + std::to_string(options_.actor_id) + ": environment step failed (episode seed " +
                               std::to_string(env_.episode_seed()) + "): " + e.what());
    }
    ++env_steps_;
    for (int i : agents) {
      TrajectorySegment& s = segs[i];
      s.rewards[t] = r.rewards[i].total;
      s.dones[t] = (r.arrived[i] || r.episode_done) ? 1 : 0;
      episode_return_[i] += r.rewards[i].total;
      const auto& v = env_.world().state().vehicles[i];
      episode_contacts_ += v.in_contact ? 1.0 : 0.0;
      episode_off_road_ += v.off_road ? 1.0 : 0.0;
      episode_arrived_ += r.arrived[i] ? 1.0 : 0.0;
    }
    if (r.episode_done) {
      ++tally_.episodes;
      tally_.success += episode_arrived_;
      tally_.crash_vehicle += episode_contacts_;
      tally_.out_of_road += episode_off_road_;
      double ret = 0.0;
      for (double x : episode_return_) ret += x;
      tally_.agent_return += ret / n;
      start_episode();
    }
  }

  const std::vector<int> agents = env_.active_agents();
  const std::vector<Choice> boot = act(agents);
  for (std::size_t k = 0; k < agents.size(); ++k) {
    TrajectorySegment& s = segs[agents[k]];
    s.bootstrap_value = boot[k].value;
    s.bootstrap_observation = env_.observation(agents[k]);
  }

  std::vector<TrajectorySegment> out;
  for (auto& s : segs) {
    if (s.num_valid() == 0) continue;
    s.peers = peers;
    out.push_back(std::move(s));
  }
  return out;
}

EpisodeTally Actor::take_tally() {
  EpisodeTally t = tally_;
  tally_ = {};
  return t;
}

}  // namespace junction::runtime
