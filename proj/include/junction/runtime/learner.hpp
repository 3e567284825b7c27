#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "junction/algos/critic.hpp"
#include "junction/algos/ddpg.hpp"
#include "junction/algos/gae.hpp"
#include "junction/algos/ppo.hpp"
#include "junction/algos/sac.hpp"
#include "junction/runtime/buffer.hpp"

namespace junction::runtime {

/// GAE per segment, advantage normalization over the valid steps of the whole
/// batch, then flattening. CTCE batches regroup every valid step with the
/// peers it was acted with; peers whose own samples are absent feed the pool
/// only. With `reward_stats`, rewards are divided by the running std of
/// discounted returns.
algos::PpoBatch build_ppo_batch(const std::vector<SegmentPtr>& batch, const nn::NetworkConfig& network,
                                const algos::Hyperparams& hyper, algos::RunningMeanStd* reward_stats = nullptr);

algos::ReplayBatch build_replay_batch(const std::vector<TransitionRef>& transitions);

/// Wraps the configured algorithm behind one update interface.
class Learner {
 public:
  Learner(nn::NetworkConfig network, algos::AlgoKind algo, algos::Hyperparams hyper, const nn::ModelParameters& init,
          std::uint64_t seed);

  /// On-policy update from a FIFO batch (PPO).
  algos::UpdateStats update(const std::vector<SegmentPtr>& batch);
  /// Off-policy update from replay transitions (SAC, DDPG).
  algos::UpdateStats update(const std::vector<TransitionRef>& transitions);

  nn::ModelParameters snapshot() const;
  std::uint64_t version() const;
  algos::AlgoKind algo() const { return algo_; }
  bool on_policy() const { return algo_ == algos::AlgoKind::kPPO; }

 private:
  nn::NetworkConfig network_;
  algos::AlgoKind algo_;
  algos::Hyperparams hyper_;
  algos::RunningMeanStd reward_stats_;
  std::unique_ptr<algos::PpoLearner> ppo_;
  std::unique_ptr<algos::SacLearner> sac_;
  std::unique_ptr<algos::DdpgLearner> ddpg_;
};

}  // namespace junction::runtime
