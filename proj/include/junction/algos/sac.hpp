#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "junction/algos/critic.hpp"
#include "junction/algos/hyperparams.hpp"
#include "junction/algos/ppo.hpp"
#include "junction/nn/policy.hpp"

namespace junction::algos {

/// Twin-critic soft actor-critic with a fixed temperature. CTDE networks only.
class SacLearner {
 public:
  SacLearner(nn::NetworkConfig config, const nn::ModelParameters& init, Hyperparams hyper, std::uint64_t seed);

  /// One critic step per Q-function, one actor step, then polyak targets.
  UpdateStats update(const ReplayBatch& batch);

  /// y = r + gamma (1 - done) (min_k Q'_k(s', a') - alpha log pi(a' | s')),
  /// with a' = tanh(mean' + std' * noise).
  Eigen::RowVectorXd critic_targets(const ReplayBatch& batch, const nn::Matrix& next_noise) const;
  /// mean(alpha log pi(a | s) - min_k Q_k(s, a)) under the reparameterized
  /// sample a = tanh(mean + std * noise); fills the policy gradient when non-null.
  double actor_loss(const ReplayBatch& batch, const nn::Matrix& noise, std::vector<double>* grad) const;

  nn::ModelParameters snapshot() const { return net_.to_parameters(version_); }
  const nn::PolicyNetwork& network() const { return net_; }
  nn::PolicyNetwork& mutable_network() { return net_; }
  Critic& critic(int k) { return critics_[k]; }
  const Critic& critic(int k) const { return critics_[k]; }
  std::uint64_t version() const { return version_; }

 private:
  nn::Matrix noise(Eigen::Index n);

  nn::PolicyNetwork net_;
  Hyperparams hyper_;
  Adam adam_;
  std::mt19937_64 rng_;
  std::array<Critic, 2> critics_;
  std::uint64_t version_ = 0;
};

}  // namespace junction::algos
