#include "junction/runtime/learner.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace junction::runtime {

algos::PpoBatch build_ppo_batch(const std::vector<SegmentPtr>& batch, const nn::NetworkConfig& network,
                                const algos::Hyperparams& hyper, algos::RunningMeanStd* reward_stats) {
  if (batch.empty()) throw std::invalid_argument("build_ppo_batch: empty batch");
  const int d = network.obs_dim;

  // Advantages and returns, flattened as [segment][t].
  std::vector<std::size_t> offset(batch.size() + 1, 0);
  for (std::size_t s = 0; s < batch.size(); ++s) {
    if (batch[s]->obs_dim != d) throw std::invalid_argument("build_ppo_batch: segment obs_dim mismatch");
    offset[s + 1] = offset[s] + static_cast<std::size_t>(batch[s]->horizon);
  }
  std::vector<double> adv(offset.back()), ret(offset.back());
  std::vector<std::uint8_t> mask(offset.back());
  if (reward_stats) {
    // Scale statistics come from forward-discounted returns restarted at each done.
    for (const auto& seg : batch) {
      double acc = 0.0;
      for (int t = 0; t < seg->horizon; ++t) {
        if (!seg->valid[t]) continue;
        acc = seg->rewards[t] + hyper.gamma * acc;
        reward_stats->update(acc);
        if (seg->dones[t]) acc = 0.0;
      }
    }
  }
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const TrajectorySegment& seg = *batch[s];
    std::vector<double> r = seg.rewards;
    if (reward_stats) {
      const double sd = reward_stats->std();
      for (double& x : r) x /= sd;
    }
    const auto g = algos::compute_gae(r, seg.values, seg.dones, seg.bootstrap_value, hyper.gamma, hyper.lambda);
    std::copy(g.advantages.begin(), g.advantages.end(), adv.begin() + static_cast<std::ptrdiff_t>(offset[s]));
    std::copy(g.returns.begin(), g.returns.end(), ret.begin() + static_cast<std::ptrdiff_t>(offset[s]));
    std::copy(seg.valid.begin(), seg.valid.end(), mask.begin() + static_cast<std::ptrdiff_t>(offset[s]));
  }
  algos::normalize_advantages(adv, mask);

  algos::PpoBatch out;
  std::vector<const double*> cols;
  auto add = [&](const double* obs, nn::ActionVec a, double logp, double a_hat, double r, int group, bool trainable) {
    cols.push_back(obs);
    out.actions.push_back(a);
    out.old_log_probs.push_back(logp);
    out.advantages.push_back(a_hat);
    out.returns.push_back(r);
    if (group >= 0) {
      out.group.push_back(group);
      out.trainable.push_back(trainable ? 1 : 0);
    }
  };

  if (network.mode == nn::Mode::kCTDE) {
    for (std::size_t s = 0; s < batch.size(); ++s) {
      const TrajectorySegment& seg = *batch[s];
      for (int t = 0; t < seg.horizon; ++t) {
        if (!seg.valid[t]) continue;
        const std::size_t k = offset[s] + t;
        add(seg.obs_at(t), {seg.pre_tanh[2 * t], seg.pre_tanh[2 * t + 1]}, seg.log_probs[t], adv[k], ret[k], -1, true);
      }
    }
  } else {
    struct Group {
      const PeerStep* step = nullptr;
      std::vector<std::ptrdiff_t> owner;  // per peer: (segment, t) flat index or -1
      std::vector<std::size_t> seg_index;
    };
    std::map<std::pair<std::uint64_t, int>, Group> groups;
    for (std::size_t s = 0; s < batch.size(); ++s) {
      const TrajectorySegment& seg = *batch[s];
      if (!seg.peers) throw std::invalid_argument("build_ppo_batch: CTCE segment without a peer table");
      for (int t = 0; t < seg.horizon; ++t) {
        if (!seg.valid[t]) continue;
        const PeerStep& step = seg.peers->steps[t];
        Group& g = groups[{seg.collect_id, t}];
        if (!g.step) {
          g.step = &step;
          g.owner.assign(step.agents.size(), -1);
          g.seg_index.assign(step.agents.size(), 0);
        }
        const auto it = std::lower_bound(step.agents.begin(), step.agents.end(), seg.agent_id);
        if (it == step.agents.end() || *it != seg.agent_id) {
          throw std::invalid_argument("build_ppo_batch: agent missing from its peer table");
        }
        const auto p = static_cast<std::size_t>(it - step.agents.begin());
        g.owner[p] = static_cast<std::ptrdiff_t>(offset[s] + t);
        g.seg_index[p] = s;
      }
    }
    int gid = 0;
    for (const auto& [key, g] : groups) {
      const int t = key.second;
      for (std::size_t p = 0; p < g.step->agents.size(); ++p) {
        const double* obs = g.step->obs.data() + p * d;
        if (g.owner[p] >= 0) {
          const TrajectorySegment& seg = *batch[g.seg_index[p]];
          const auto k = static_cast<std::size_t>(g.owner[p]);
          add(obs, {seg.pre_tanh[2 * t], seg.pre_tanh[2 * t + 1]}, seg.log_probs[t], adv[k], ret[k], gid, true);
        } else {
          add(obs, {0.0, 0.0}, 0.0, 0.0, 0.0, gid, false);
        }
        out.positions.push_back(g.step->positions[p]);
      }
      ++gid;
    }
  }

  out.obs.resize(d, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.obs.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(cols[j], d);
  }
  return out;
}

algos::ReplayBatch build_replay_batch(const std::vector<TransitionRef>& transitions) {
  if (transitions.empty()) throw std::invalid_argument("build_replay_batch: no transitions");
  const int d = transitions.front().segment->obs_dim;
  const auto n = static_cast<Eigen::Index>(transitions.size());
  algos::ReplayBatch b;
  b.obs.resize(d, n);
  b.next_obs.resize(d, n);
  b.actions.resize(2, n);
  b.rewards.resize(n);
  b.dones.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const TrajectorySegment& seg = *transitions[j].segment;
    const int t = transitions[j].t;
    b.obs.col(j) = Eigen::Map<const Eigen::VectorXd>(seg.obs_at(t), d);
    b.next_obs.col(j) = Eigen::Map<const Eigen::VectorXd>(seg.next_obs_at(t), d);
    b.actions(0, j) = seg.actions[2 * t];
    b.actions(1, j) = seg.actions[2 * t + 1];
    b.rewards[j] = seg.rewards[t];
    b.dones[j] = seg.dones[t];
  }
  return b;
}

Learner::Learner(nn::NetworkConfig network, algos::AlgoKind algo, algos::Hyperparams hyper,
                 const nn::ModelParameters& init, std::uint64_t seed)
    : network_(std::move(network)), algo_(algo), hyper_(std::move(hyper)) {
  switch (algo_) {
    case algos::AlgoKind::kPPO:
      ppo_ = std::make_unique<algos::PpoLearner>(network_, init, hyper_, seed);
      break;
    case algos::AlgoKind::kSAC:
      sac_ = std::make_unique<algos::SacLearner>(network_, init, hyper_, seed);
      break;
    case algos::AlgoKind::kDDPG:
      ddpg_ = std::make_unique<algos::DdpgLearner>(network_, init, hyper_, seed);
      break;
  }
}

algos::UpdateStats Learner::update(const std::vector<SegmentPtr>& batch) {
  if (!ppo_) throw std::logic_error("learner: segment batches need an on-policy algorithm");
  return ppo_->update(build_ppo_batch(batch, network_, hyper_, hyper_.reward_scaling ? &reward_stats_ : nullptr));
}

algos::UpdateStats Learner::update(const std::vector<TransitionRef>& transitions) {
  const algos::ReplayBatch b = build_replay_batch(transitions);
  if (sac_) return sac_->update(b);
  if (ddpg_) return ddpg_->update(b);
  throw std::logic_error("learner: replay batches need an off-policy algorithm");
}

nn::ModelParameters Learner::snapshot() const {
  if (ppo_) return ppo_->snapshot();
  if (sac_) return sac_->snapshot();
  return ddpg_->snapshot();
}

std::uint64_t Learner::version() const {
  if (ppo_) return ppo_->version();
  if (sac_) return sac_->version();
  return ddpg_->version();
}

}  // namespace junction::runtime
