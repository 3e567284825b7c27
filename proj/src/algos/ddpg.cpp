#include "junction/algos/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace junction::algos {

nn::ActionVec ddpg_behavior_action(const nn::ActionVec& mean, double sigma, std::mt19937_64& rng) {
  nn::ActionVec a = nn::deterministic_action(mean);
  if (sigma <= 0.0) return a;
  std::normal_distribution<double> g(0.0, sigma);
  for (double& v : a) v = std::clamp(v + g(rng), -1.0, 1.0);
  return a;
}

namespace {
const nn::NetworkConfig& require_ctde(const nn::NetworkConfig& c) {
  if (c.mode != nn::Mode::kCTDE) throw std::invalid_argument("algo.name: ddpg requires network.mode = ctde");
  return c;
}
}  // namespace

DdpgLearner::DdpgLearner(nn::NetworkConfig config, const nn::ModelParameters& init, Hyperparams hyper,
                         std::uint64_t seed)
    : net_(require_ctde(config), init),
      target_net_(config, init),
      hyper_(std::move(hyper)),
      adam_(net_.num_params(), hyper_.learning_rate),
      rng_(seed),
      critic_(QFunction(config.obs_dim, 2, hyper_.critic_hidden), hyper_.learning_rate, rng_),
      version_(init.version) {}

Eigen::RowVectorXd DdpgLearner::critic_targets(const ReplayBatch& b) const {
  const nn::Matrix a_next = target_net_.forward_batch(b.next_obs).mean.array().tanh().matrix();
  const auto q = critic_.fn.forward(critic_.target, b.next_obs, a_next).q;
  return b.rewards.array() + hyper_.gamma * (1.0 - b.dones.array()) * q.array();
}

double DdpgLearner::actor_loss(const ReplayBatch& b, std::vector<double>* grad) const {
  const auto fwd = net_.forward_batch(b.obs);
  const nn::Matrix a = fwd.mean.array().tanh().matrix();
  const auto e = critic_.fn.forward(critic_.theta, b.obs, a);
  const Eigen::Index n = b.size();
  const double loss = -e.q.mean();
  if (!grad) return loss;
  std::vector<double> scratch(critic_.fn.num_params());
  const nn::Matrix da =
      critic_.fn.backward(critic_.theta, e, Eigen::RowVectorXd::Constant(n, -1.0 / static_cast<double>(n)), scratch);
  const nn::Matrix d_mean = (da.array() * (1.0 - a.array().square())).matrix();
  *grad = net_.backward(fwd, d_mean, Eigen::VectorXd::Zero(2), Eigen::RowVectorXd::Zero(n));
  return loss;
}

UpdateStats DdpgLearner::update(const ReplayBatch& b) {
  b.validate();
  UpdateStats s;
  std::vector<double> g;
  s.value_loss = critic_mse(critic_.fn, critic_.theta, b.obs, b.actions, critic_targets(b), &g);
  critic_.adam.step(critic_.theta, g);

  s.policy_loss = actor_loss(b, &g);
  s.grad_norm = clip_grad_norm(g, hyper_.max_grad_norm);
  adam_.step(net_.mutable_params(), g);
  net_.round_to_float();

  polyak_update(critic_.target, critic_.theta, hyper_.tau);
  std::vector<double> target(target_net_.params().begin(), target_net_.params().end());
  polyak_update(target, net_.params(), hyper_.tau);
  target_net_.set_params(target);

  s.samples = static_cast<std::size_t>(b.size());
  s.version = ++version_;
  return s;
}

}  // namespace junction::algos
