#include "junction/algos/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace junction::algos {

std::size_t PpoBatch::num_trainable() const {
  if (trainable.empty()) return size();
  return static_cast<std::size_t>(std::count_if(trainable.begin(), trainable.end(), [](auto t) { return t != 0; }));
}

void PpoBatch::validate() const {
  const std::size_t n = size();
  if (actions.size() != n || old_log_probs.size() != n || advantages.size() != n || returns.size() != n) {
    throw std::invalid_argument("PpoBatch: misaligned arrays");
  }
  if (!group.empty() && group.size() != n) throw std::invalid_argument("PpoBatch: group length mismatch");
  if (!trainable.empty() && trainable.size() != n) throw std::invalid_argument("PpoBatch: trainable length mismatch");
  if (!positions.empty() && positions.size() != n) throw std::invalid_argument("PpoBatch: positions length mismatch");
}

double clipped_surrogate(double ratio, double advantage, double eps) {
  return std::min(ratio * advantage, std::clamp(ratio, 1.0 - eps, 1.0 + eps) * advantage);
}

PpoLearner::PpoLearner(nn::NetworkConfig config, const nn::ModelParameters& init, Hyperparams hyper,
                       std::uint64_t seed)
    : net_(std::move(config), init),
      hyper_(std::move(hyper)),
      adam_(net_.num_params(), hyper_.learning_rate),
      rng_(seed),
      version_(init.version) {}

PpoLearner::Loss PpoLearner::minibatch_loss(const PpoBatch& b, const std::vector<std::size_t>& cols,
                                            std::vector<double>* grad) const {
  const auto m = static_cast<Eigen::Index>(cols.size());
  nn::Matrix obs(b.obs.rows(), m);
  for (Eigen::Index j = 0; j < m; ++j) obs.col(j) = b.obs.col(static_cast<Eigen::Index>(cols[j]));

  std::shared_ptr<const nn::PoolingMatrix> pool;
  if (net_.config().mode == nn::Mode::kCTCE) {
    if (b.group.empty()) throw std::invalid_argument("PpoBatch: CTCE batches need group ids");
    std::vector<int> g(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) g[j] = b.group[cols[j]];
    const double radius = net_.config().pooling_radius;
    if (radius > 0.0) {
      if (b.positions.empty()) throw std::invalid_argument("PpoBatch: radius pooling needs positions");
      std::vector<std::array<double, 2>> pos(cols.size());
      for (std::size_t j = 0; j < cols.size(); ++j) pos[j] = b.positions[cols[j]];
      pool = std::make_shared<nn::PoolingMatrix>(nn::pooling_by_group(g, pos, radius));
    } else {
      pool = std::make_shared<nn::PoolingMatrix>(nn::pooling_by_group(g));
    }
  }
  const auto fwd = net_.forward_batch(obs, pool);
  const nn::ActionVec log_std{fwd.log_std[0], fwd.log_std[1]};

  Loss loss;
  for (std::size_t c : cols) loss.n += b.is_trainable(c) ? 1 : 0;
  if (loss.n == 0) return loss;
  const double inv_n = 1.0 / static_cast<double>(loss.n);
  const double eps = hyper_.clip_epsilon;

  nn::Matrix d_mean = nn::Matrix::Zero(2, m);
  Eigen::VectorXd d_log_std = Eigen::VectorXd::Zero(2);
  Eigen::RowVectorXd d_value = Eigen::RowVectorXd::Zero(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const std::size_t c = cols[j];
    if (!b.is_trainable(c)) continue;
    const auto lp = nn::log_prob_grad_pre_tanh({fwd.mean(0, j), fwd.mean(1, j)}, log_std, b.actions[c]);
    const double ratio = std::exp(lp.log_prob - b.old_log_probs[c]);
    const double adv = b.advantages[c];
    loss.policy -= clipped_surrogate(ratio, adv, eps) * inv_n;
    loss.clip_fraction += (std::abs(ratio - 1.0) > eps ? 1.0 : 0.0) * inv_n;
    loss.kl += ((ratio - 1.0) - std::log(ratio)) * inv_n;
    const double verr = fwd.value[j] - b.returns[c];
    loss.value += verr * verr * inv_n;
    if (!grad) continue;
    // Gradient flows through the unclipped branch only when it is the active minimum.
    if (ratio * adv <= std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv) {
      const double g = -ratio * adv * inv_n;
      d_mean(0, j) = g * lp.d_mean[0];
      d_mean(1, j) = g * lp.d_mean[1];
      d_log_std[0] += g * lp.d_log_std[0];
      d_log_std[1] += g * lp.d_log_std[1];
    }
    d_value[j] = 2.0 * hyper_.value_coef * verr * inv_n;
  }
  loss.entropy = nn::gaussian_entropy(log_std);
  if (grad) {
    d_log_std.array() -= hyper_.entropy_coef;
    *grad = net_.backward(fwd, d_mean, d_log_std, d_value);
  }
  return loss;
}

namespace {

/// Units that must stay in one minibatch: whole pooling groups in CTCE, single columns otherwise.
std::vector<std::vector<std::size_t>> make_units(const PpoBatch& b, bool pooled) {
  std::vector<std::vector<std::size_t>> units;
  if (!pooled || b.group.empty()) {
    for (std::size_t i = 0; i < b.size(); ++i) units.push_back({i});
    return units;
  }
  std::map<int, std::size_t> index;
  for (std::size_t i = 0; i < b.size(); ++i) {
    auto [it, fresh] = index.try_emplace(b.group[i], units.size());
    if (fresh) units.emplace_back();
    units[it->second].push_back(i);
  }
  return units;
}

}  // namespace

UpdateStats PpoLearner::evaluate(const PpoBatch& b) const {
  b.validate();
  if (b.num_trainable() == 0) throw std::invalid_argument("ppo: empty batch");
  std::vector<std::size_t> all(b.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const Loss l = minibatch_loss(b, all, nullptr);
  UpdateStats s;
  s.policy_loss = l.policy;
  s.value_loss = l.value;
  s.entropy = l.entropy;
  s.clip_fraction = l.clip_fraction;
  s.approx_kl = l.kl;
  s.samples = l.n;
  s.version = version_;
  return s;
}

UpdateStats PpoLearner::update(const PpoBatch& b) {
  b.validate();
  if (b.num_trainable() == 0) throw std::invalid_argument("ppo: empty batch");
  auto units = make_units(b, net_.config().mode == nn::Mode::kCTCE);

  UpdateStats s;
  double weight = 0.0, grad_norm_sum = 0.0;
  int steps = 0;
  for (int epoch = 0; epoch < hyper_.epochs; ++epoch) {
    std::shuffle(units.begin(), units.end(), rng_);
    std::size_t u = 0;
    while (u < units.size()) {
      std::vector<std::size_t> cols;
      std::size_t trainable = 0;
      while (u < units.size() && trainable < static_cast<std::size_t>(hyper_.minibatch_size)) {
        for (std::size_t c : units[u]) {
          cols.push_back(c);
          trainable += b.is_trainable(c) ? 1 : 0;
        }
        ++u;
      }
      if (trainable == 0) continue;
      std::vector<double> grad;
      const Loss l = minibatch_loss(b, cols, &grad);
      grad_norm_sum += clip_grad_norm(grad, hyper_.max_grad_norm);
      adam_.step(net_.mutable_params(), grad);
      net_.round_to_float();
      ++steps;
      const double w = static_cast<double>(l.n);
      s.policy_loss += l.policy * w;
      s.value_loss += l.value * w;
      s.entropy += l.entropy * w;
      s.clip_fraction += l.clip_fraction * w;
      s.approx_kl += l.kl * w;
      weight += w;
    }
  }
  s.policy_loss /= weight;
  s.value_loss /= weight;
  s.entropy /= weight;
  s.clip_fraction /= weight;
  s.approx_kl /= weight;
  s.grad_norm = grad_norm_sum / std::max(1, steps);
  s.samples = b.num_trainable();
  s.version = ++version_;
  return s;
}

}  // namespace junction::algos
