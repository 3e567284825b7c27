#include "junction/algos/hyperparams.hpp"

#include <cctype>
#include <stdexcept>
#include <string>

namespace junction::algos {

const char* algo_name(AlgoKind k) {
  switch (k) {
    case AlgoKind::kPPO:
      return "ppo";
    case AlgoKind::kSAC:
      return "sac";
    case AlgoKind::kDDPG:
      return "ddpg";
  }
  return "?";
}

AlgoKind parse_algo(const char* text) {
  std::string s(text);
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "ppo") return AlgoKind::kPPO;
  if (s == "sac") return AlgoKind::kSAC;
  if (s == "ddpg") return AlgoKind::kDDPG;
  throw std::invalid_argument("algo.name: expected ppo, sac or ddpg, got '" + std::string(text) + "'");
}

void Hyperparams::validate() const {
  auto fail = [](const char* key, const char* what) { throw std::invalid_argument(std::string(key) + ": " + what); };
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail("algo.gamma", "must be in [0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail("algo.lambda", "must be in [0, 1]");
  if (!(clip_epsilon > 0.0)) fail("algo.clip_epsilon", "must be > 0");
  if (!(learning_rate > 0.0)) fail("algo.learning_rate", "must be > 0");
  if (!(entropy_coef >= 0.0)) fail("algo.entropy_coef", "must be >= 0");
  if (!(value_coef >= 0.0)) fail("algo.value_coef", "must be >= 0");
  if (epochs < 1) fail("algo.epochs", "must be >= 1");
  if (minibatch_size < 1) fail("algo.minibatch_size", "must be >= 1");
  if (!(max_grad_norm >= 0.0)) fail("algo.max_grad_norm", "must be >= 0");
  if (!(tau > 0.0 && tau <= 1.0)) fail("algo.tau", "must be in (0, 1]");
  if (!(sac_alpha >= 0.0)) fail("algo.sac_alpha", "must be >= 0");
  if (!(ddpg_noise >= 0.0)) fail("algo.ddpg_noise", "must be >= 0");
  if (replay_batch_size < 1) fail("algo.replay_batch_size", "must be >= 1");
  if (critic_hidden.empty()) fail("algo.critic_hidden", "must list at least one layer");
  for (int h : critic_hidden) {
    if (h < 1) fail("algo.critic_hidden", "sizes must be >= 1");
  }
}

}  // namespace junction::algos
