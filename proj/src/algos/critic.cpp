#include "junction/algos/critic.hpp"

#include <stdexcept>

namespace junction::algos {

namespace {
std::vector<int> q_sizes(int obs_dim, int action_dim, const std::vector<int>& hidden) {
  std::vector<int> s{obs_dim + action_dim};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(1);
  return s;
}
}  // namespace

QFunction::QFunction(int obs_dim, int action_dim, const std::vector<int>& hidden)
    : obs_dim_(obs_dim), action_dim_(action_dim), mlp_(q_sizes(obs_dim, action_dim, hidden), false) {}

QFunction::Eval QFunction::forward(std::span<const double> theta, const nn::Matrix& obs, const nn::Matrix& act) const {
  if (obs.rows() != obs_dim_ || act.rows() != action_dim_ || obs.cols() != act.cols()) {
    throw std::invalid_argument("QFunction: input shape mismatch");
  }
  nn::Matrix x(obs_dim_ + action_dim_, obs.cols());
  x << obs, act;
  Eval e;
  e.q = mlp_.forward(theta, x, &e.cache).row(0);
  return e;
}

nn::Matrix QFunction::backward(std::span<const double> theta, const Eval& e, const Eigen::RowVectorXd& dq,
                               std::span<double> grad) const {
  const nn::Matrix dx = mlp_.backward(theta, e.cache, nn::Matrix(dq), grad);
  return dx.bottomRows(action_dim_);
}

Critic::Critic(const QFunction& f, double lr, std::mt19937_64& rng)
    : fn(f), theta(f.num_params()), target(f.num_params()), adam(f.num_params(), lr) {
  fn.init(theta, rng);
  target = theta;
}

double critic_mse(const QFunction& q, std::span<const double> theta, const nn::Matrix& obs, const nn::Matrix& act,
                  const Eigen::RowVectorXd& y, std::vector<double>* grad) {
  const auto e = q.forward(theta, obs, act);
  const Eigen::RowVectorXd err = e.q - y;
  const double n = static_cast<double>(obs.cols());
  if (grad) {
    grad->assign(q.num_params(), 0.0);
    q.backward(theta, e, err * (2.0 / n), *grad);
  }
  return err.squaredNorm() / n;
}

void polyak_update(std::span<double> target, std::span<const double> online, double tau) {
  if (target.size() != online.size()) throw std::invalid_argument("polyak_update: size mismatch");
  for (std::size_t i = 0; i < target.size(); ++i) target[i] = (1.0 - tau) * target[i] + tau * online[i];
}

void ReplayBatch::validate() const {
  const Eigen::Index n = obs.cols();
  if (n == 0) throw std::invalid_argument("replay batch is empty");
  if (actions.cols() != n || rewards.size() != n || next_obs.cols() != n || dones.size() != n ||
      next_obs.rows() != obs.rows()) {
    throw std::invalid_argument("replay batch: misaligned arrays");
  }
}

}  // namespace junction::algos
