#pragma once

#include <random>
#include <span>
#include <vector>

#include "junction/algos/adam.hpp"
#include "junction/nn/dense.hpp"

namespace junction::algos {

/// Q(s, a): tanh MLP over the concatenation [obs; action] with a scalar output.
class QFunction {
 public:
  QFunction(int obs_dim, int action_dim, const std::vector<int>& hidden);

  std::size_t num_params() const { return mlp_.num_params(); }
  int obs_dim() const { return obs_dim_; }
  int action_dim() const { return action_dim_; }
  void init(std::span<double> theta, std::mt19937_64& rng) const { mlp_.init_uniform(theta, rng); }

  struct Eval {
    Eigen::RowVectorXd q;
    nn::Mlp::Cache cache;
  };
  Eval forward(std::span<const double> theta, const nn::Matrix& obs, const nn::Matrix& act) const;
  /// Accumulates dL/dtheta into `grad` given dL/dq and returns dL/daction.
  nn::Matrix backward(std::span<const double> theta, const Eval& eval, const Eigen::RowVectorXd& dq,
                      std::span<double> grad) const;

 private:
  int obs_dim_, action_dim_;
  nn::Mlp mlp_;
};

/// Online parameters, polyak target and optimizer state for one Q-function.
struct Critic {
  Critic(const QFunction& fn, double lr, std::mt19937_64& rng);

  QFunction fn;
  std::vector<double> theta;
  std::vector<double> target;
  Adam adam;
};

/// mean((Q(s, a) - y)^2); fills `grad` when non-null.
double critic_mse(const QFunction& q, std::span<const double> theta, const nn::Matrix& obs, const nn::Matrix& act,
                  const Eigen::RowVectorXd& y, std::vector<double>* grad);

/// target <- (1 - tau) target + tau online.
void polyak_update(std::span<double> target, std::span<const double> online, double tau);

/// Off-policy transitions, one per column.
struct ReplayBatch {
  nn::Matrix obs;
  nn::Matrix actions;  // action_dim x N
  Eigen::RowVectorXd rewards;
  nn::Matrix next_obs;
  Eigen::RowVectorXd dones;

  Eigen::Index size() const { return obs.cols(); }
  void validate() const;
};

}  // namespace junction::algos
