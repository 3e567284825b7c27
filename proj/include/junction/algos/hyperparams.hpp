#pragma once

#include <vector>

namespace junction::algos {

enum class AlgoKind { kPPO, kSAC, kDDPG };

const char* algo_name(AlgoKind k);
/// Parses "ppo" / "sac" / "ddpg"; throws std::invalid_argument otherwise.
AlgoKind parse_algo(const char* text);

struct Hyperparams {
  double gamma = 0.99;
  double lambda = 0.95;
  double clip_epsilon = 0.2;
  double learning_rate = 3e-4;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  int epochs = 4;
  int minibatch_size = 512;
  double max_grad_norm = 0.5;
  bool reward_scaling = false;

  // Off-policy learners.
  double tau = 0.005;
  double sac_alpha = 0.2;
  double ddpg_noise = 0.1;
  int replay_batch_size = 256;
  std::vector<int> critic_hidden{256, 256};

  /// Throws std::invalid_argument naming the offending key (prefix "algo.").
  void validate() const;
};

}  // namespace junction::algos
