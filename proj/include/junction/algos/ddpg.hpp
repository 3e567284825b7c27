#pragma once

#include <cstdint>
#include <random>

#include "junction/algos/critic.hpp"
#include "junction/algos/hyperparams.hpp"
#include "junction/algos/ppo.hpp"
#include "junction/nn/policy.hpp"

namespace junction::algos {

/// tanh(mean) plus N(0, sigma) noise, clipped to [-1, 1].
nn::ActionVec ddpg_behavior_action(const nn::ActionVec& mean, double sigma, std::mt19937_64& rng);

/// Deterministic actor tanh(mean) with a single critic and polyak targets
/// for both. CTDE networks only.
class DdpgLearner {
 public:
  DdpgLearner(nn::NetworkConfig config, const nn::ModelParameters& init, Hyperparams hyper, std::uint64_t seed);

  UpdateStats update(const ReplayBatch& batch);

  /// y = r + gamma (1 - done) Q'(s', tanh(mean_target(s'))).
  Eigen::RowVectorXd critic_targets(const ReplayBatch& batch) const;
  /// -mean Q(s, tanh(mean(s))); fills the policy gradient when non-null.
  double actor_loss(const ReplayBatch& batch, std::vector<double>* grad) const;

  nn::ModelParameters snapshot() const { return net_.to_parameters(version_); }
  const nn::PolicyNetwork& network() const { return net_; }
  nn::PolicyNetwork& mutable_network() { return net_; }
  const nn::PolicyNetwork& target_network() const { return target_net_; }
  Critic& critic() { return critic_; }
  std::uint64_t version() const { return version_; }

 private:
  nn::PolicyNetwork net_;
  nn::PolicyNetwork target_net_;
  Hyperparams hyper_;
  Adam adam_;
  std::mt19937_64 rng_;
  Critic critic_;
  std::uint64_t version_ = 0;
};

}  // namespace junction::algos
