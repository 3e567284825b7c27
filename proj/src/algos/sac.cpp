#include "junction/algos/sac.hpp"

#include <cmath>
#include <stdexcept>

namespace junction::algos {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

const nn::NetworkConfig& require_ctde(const nn::NetworkConfig& c, const char* algo) {
  if (c.mode != nn::Mode::kCTDE) {
    throw std::invalid_argument(std::string("algo.name: ") + algo + " requires network.mode = ctde");
  }
  return c;
}

struct Reparam {
  nn::Matrix u, a;
  Eigen::RowVectorXd log_pi;
};

Reparam reparameterize(const nn::PolicyNetwork::Batch& fwd, const nn::Matrix& noise) {
  Reparam r;
  r.u = fwd.mean;
  for (int k = 0; k < 2; ++k) r.u.row(k).array() += std::exp(fwd.log_std[k]) * noise.row(k).array();
  r.a = r.u.array().tanh().matrix();
  r.log_pi = Eigen::RowVectorXd::Zero(noise.cols());
  for (Eigen::Index j = 0; j < noise.cols(); ++j) {
    for (int k = 0; k < 2; ++k) {
      r.log_pi[j] += -0.5 * noise(k, j) * noise(k, j) - fwd.log_std[k] - kHalfLog2Pi - nn::log1m_tanh_sq(r.u(k, j));
    }
  }
  return r;
}

}  // namespace

SacLearner::SacLearner(nn::NetworkConfig config, const nn::ModelParameters& init, Hyperparams hyper,
                       std::uint64_t seed)
    : net_(require_ctde(config, "sac"), init),
      hyper_(std::move(hyper)),
      adam_(net_.num_params(), hyper_.learning_rate),
      rng_(seed),
      critics_{Critic(QFunction(config.obs_dim, 2, hyper_.critic_hidden), hyper_.learning_rate, rng_),
               Critic(QFunction(config.obs_dim, 2, hyper_.critic_hidden), hyper_.learning_rate, rng_)},
      version_(init.version) {}

nn::Matrix SacLearner::noise(Eigen::Index n) {
  std::normal_distribution<double> g(0.0, 1.0);
  nn::Matrix e(2, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    e(0, j) = g(rng_);
    e(1, j) = g(rng_);
  }
  return e;
}

Eigen::RowVectorXd SacLearner::critic_targets(const ReplayBatch& b, const nn::Matrix& next_noise) const {
  const auto fwd = net_.forward_batch(b.next_obs);
  const Reparam r = reparameterize(fwd, next_noise);
  const auto q1 = critics_[0].fn.forward(critics_[0].target, b.next_obs, r.a).q;
  const auto q2 = critics_[1].fn.forward(critics_[1].target, b.next_obs, r.a).q;
  const Eigen::RowVectorXd soft = q1.cwiseMin(q2) - hyper_.sac_alpha * r.log_pi;
  return b.rewards.array() + hyper_.gamma * (1.0 - b.dones.array()) * soft.array();
}

double SacLearner::actor_loss(const ReplayBatch& b, const nn::Matrix& noise, std::vector<double>* grad) const {
  const auto fwd = net_.forward_batch(b.obs);
  const Reparam r = reparameterize(fwd, noise);
  const auto e1 = critics_[0].fn.forward(critics_[0].theta, b.obs, r.a);
  const auto e2 = critics_[1].fn.forward(critics_[1].theta, b.obs, r.a);
  const Eigen::Index n = b.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double alpha = hyper_.sac_alpha;
  const Eigen::RowVectorXd qmin = e1.q.cwiseMin(e2.q);
  const double loss = (alpha * r.log_pi - qmin).sum() * inv_n;
  if (!grad) return loss;

  Eigen::RowVectorXd pick1(n), pick2(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const bool first = e1.q[j] <= e2.q[j];
    pick1[j] = first ? -inv_n : 0.0;
    pick2[j] = first ? 0.0 : -inv_n;
  }
  std::vector<double> scratch1(critics_[0].fn.num_params()), scratch2(critics_[1].fn.num_params());
  const nn::Matrix da = critics_[0].fn.backward(critics_[0].theta, e1, pick1, scratch1) +
                        critics_[1].fn.backward(critics_[1].theta, e2, pick2, scratch2);

  nn::Matrix d_mean(2, n);
  Eigen::VectorXd d_log_std = Eigen::VectorXd::Zero(2);
  for (int k = 0; k < 2; ++k) {
    const double sigma = std::exp(fwd.log_std[k]);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double t = r.a(k, j);
      // d(log pi)/du at fixed noise is 2 tanh(u); the direct log-std term is -1.
      const double du = da(k, j) * (1.0 - t * t) + alpha * inv_n * 2.0 * t;
      d_mean(k, j) = du;
      d_log_std[k] += du * sigma * noise(k, j) - alpha * inv_n;
    }
  }
  *grad = net_.backward(fwd, d_mean, d_log_std, Eigen::RowVectorXd::Zero(n));
  return loss;
}

UpdateStats SacLearner::update(const ReplayBatch& b) {
  b.validate();
  const Eigen::RowVectorXd y = critic_targets(b, noise(b.size()));
  UpdateStats s;
  for (auto& c : critics_) {
    std::vector<double> g;
    s.value_loss += 0.5 * critic_mse(c.fn, c.theta, b.obs, b.actions, y, &g);
    c.adam.step(c.theta, g);
  }
  std::vector<double> g;
  const nn::Matrix eps = noise(b.size());
  s.policy_loss = actor_loss(b, eps, &g);
  s.grad_norm = clip_grad_norm(g, hyper_.max_grad_norm);
  adam_.step(net_.mutable_params(), g);
  net_.round_to_float();
  for (auto& c : critics_) polyak_update(c.target, c.theta, hyper_.tau);

  const auto fwd = net_.forward_batch(b.obs);
  s.entropy = -reparameterize(fwd, eps).log_pi.mean();
  s.samples = static_cast<std::size_t>(b.size());
  s.version = ++version_;
  return s;
}

}  // namespace junction::algos
