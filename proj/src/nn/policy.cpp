#include "junction/nn/policy.hpp"

#include <map>
#include <stdexcept>

namespace junction::nn {

PoolingMatrix pooling_by_group(const std::vector<int>& group) {
  const int n = static_cast<int>(group.size());
  std::map<int, std::vector<int>> members;
  for (int i = 0; i < n; ++i) members[group[i]].push_back(i);
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < n; ++i) {
    const auto& m = members[group[i]];
    const double w = 1.0 / static_cast<double>(m.size());
    for (int j : m) trips.emplace_back(i, j, w);
  }
  PoolingMatrix p(n, n);
  p.setFromTriplets(trips.begin(), trips.end());
  return p;
}

PoolingMatrix pooling_by_radius(const std::vector<std::array<double, 2>>& positions, double radius) {
  const int n = static_cast<int>(positions.size());
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < n; ++i) {
    std::vector<int> near;
    for (int j = 0; j < n; ++j) {
      const double dx = positions[j][0] - positions[i][0], dy = positions[j][1] - positions[i][1];
      if (j == i || dx * dx + dy * dy <= radius * radius) near.push_back(j);
    }
    const double w = 1.0 / static_cast<double>(near.size());
    for (int j : near) trips.emplace_back(i, j, w);
  }
  PoolingMatrix p(n, n);
  p.setFromTriplets(trips.begin(), trips.end());
  return p;
}

PoolingMatrix pooling_by_group(const std::vector<int>& group, const std::vector<std::array<double, 2>>& positions,
                               double radius) {
  if (radius <= 0.0) return pooling_by_group(group);
  if (positions.size() != group.size()) throw std::invalid_argument("pooling_by_group: positions length mismatch");
  const int n = static_cast<int>(group.size());
  std::map<int, std::vector<int>> members;
  for (int i = 0; i < n; ++i) members[group[i]].push_back(i);
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < n; ++i) {
    std::vector<int> near;
    for (int j : members[group[i]]) {
      const double dx = positions[j][0] - positions[i][0], dy = positions[j][1] - positions[i][1];
      if (j == i || dx * dx + dy * dy <= radius * radius) near.push_back(j);
    }
    const double w = 1.0 / static_cast<double>(near.size());
    for (int j : near) trips.emplace_back(i, j, w);
  }
  PoolingMatrix p(n, n);
  p.setFromTriplets(trips.begin(), trips.end());
  return p;
}

PolicyNetwork::PolicyNetwork(NetworkConfig config) : config_(std::move(config)), layout_(make_layout(config_)) {
  const auto& h = config_.hidden;
  if (config_.mode == Mode::kCTCE) {
    first_ = Mlp({config_.obs_dim, h[0]}, true);
    std::vector<int> rest{h[0] + config_.effective_pooled_width()};
    rest.insert(rest.end(), h.begin() + 1, h.end());
    second_ = Mlp(rest, true);
  } else {
    std::vector<int> trunk{config_.obs_dim};
    trunk.insert(trunk.end(), h.begin(), h.end());
    first_ = Mlp(trunk, true);
    second_ = Mlp({first_.output_size()}, true);
  }
  const int f = second_.output_size();
  mean_head_ = Mlp({f, config_.action_dim}, false);
  value_head_ = Mlp({f, 1}, false);
  second_offset_ = first_.num_params();
  mean_offset_ = second_offset_ + second_.num_params();
  log_std_offset_ = mean_offset_ + mean_head_.num_params();
  value_offset_ = log_std_offset_ + config_.action_dim;
  theta_.assign(value_offset_ + value_head_.num_params(), 0.0);
  if (theta_.size() != layout_size(layout_)) throw std::logic_error("PolicyNetwork: layout size mismatch");
}

PolicyNetwork::PolicyNetwork(NetworkConfig config, const ModelParameters& params) : PolicyNetwork(std::move(config)) {
  set_params(params);
}

void PolicyNetwork::set_params(const ModelParameters& params) {
  params.check();
  if (params.layout != layout_) throw std::invalid_argument("parameters do not match the network layout");
  for (std::size_t i = 0; i < theta_.size(); ++i) theta_[i] = params.values[i];
}

void PolicyNetwork::set_params(std::span<const double> theta) {
  if (theta.size() != theta_.size()) throw std::invalid_argument("parameter count mismatch");
  std::copy(theta.begin(), theta.end(), theta_.begin());
}

ModelParameters PolicyNetwork::to_parameters(std::uint64_t version) const {
  ModelParameters p;
  p.layout = layout_;
  p.version = version;
  p.values.resize(theta_.size());
  for (std::size_t i = 0; i < theta_.size(); ++i) p.values[i] = static_cast<float>(theta_[i]);
  return p;
}

void PolicyNetwork::round_to_float() {
  for (double& v : theta_) v = static_cast<double>(static_cast<float>(v));
}

PolicyNetwork::Batch PolicyNetwork::forward_batch(const Matrix& obs, std::shared_ptr<const PoolingMatrix> pooling) const {
  if (obs.rows() != config_.obs_dim) throw std::invalid_argument("observation size mismatch");
  if (obs.cols() == 0) throw std::invalid_argument("empty batch");
  Batch b;
  b.hidden = first_.forward(block(0, first_.num_params()), obs, &b.first);
  if (config_.mode == Mode::kCTCE) {
    if (pooling && (pooling->rows() != obs.cols() || pooling->cols() != obs.cols())) {
      throw std::invalid_argument("pooling matrix size mismatch");
    }
    Matrix pooled;
    if (pooling) {
      pooled = b.hidden * pooling->transpose();
    } else {
      pooled = b.hidden.rowwise().mean().replicate(1, obs.cols());
    }
    Matrix x2(b.hidden.rows() * 2, obs.cols());
    x2 << b.hidden, pooled;
    b.features = second_.forward(block(second_offset_, second_.num_params()), x2, &b.second);
    b.pooling = std::move(pooling);
    b.pooled = true;
  } else {
    b.features = second_.forward({}, b.hidden, &b.second);
  }
  b.mean = mean_head_.forward(block(mean_offset_, mean_head_.num_params()), b.features, &b.mean_head);
  b.value = value_head_.forward(block(value_offset_, value_head_.num_params()), b.features, &b.value_head).row(0);
  b.raw_log_std.resize(config_.action_dim);
  b.log_std.resize(config_.action_dim);
  for (int k = 0; k < config_.action_dim; ++k) {
    b.raw_log_std[k] = theta_[log_std_offset_ + k];
    b.log_std[k] = clamp_log_std(b.raw_log_std[k]);
  }
  return b;
}

std::vector<double> PolicyNetwork::backward(const Batch& b, const Matrix& d_mean, const Eigen::VectorXd& d_log_std,
                                            const Eigen::RowVectorXd& d_value) const {
  const Eigen::Index n = b.mean.cols();
  if (d_mean.rows() != b.mean.rows() || d_mean.cols() != n || d_value.size() != n ||
      d_log_std.size() != config_.action_dim) {
    throw std::invalid_argument("backward: gradient shape mismatch");
  }
  std::vector<double> grad(theta_.size(), 0.0);
  std::span<double> g(grad);
  Matrix d_features =
      mean_head_.backward(block(mean_offset_, mean_head_.num_params()), b.mean_head, d_mean,
                          g.subspan(mean_offset_, mean_head_.num_params()));
  d_features += value_head_.backward(block(value_offset_, value_head_.num_params()), b.value_head, Matrix(d_value),
                                     g.subspan(value_offset_, value_head_.num_params()));
  Matrix d_hidden;
  if (b.pooled) {
    const Matrix dx2 = second_.backward(block(second_offset_, second_.num_params()), b.second, std::move(d_features),
                                        g.subspan(second_offset_, second_.num_params()));
    const Eigen::Index w = b.hidden.rows();
    d_hidden = dx2.topRows(w);
    const Matrix d_pooled = dx2.bottomRows(w);
    if (b.pooling) {
      d_hidden += d_pooled * (*b.pooling);
    } else {
      d_hidden.colwise() += d_pooled.rowwise().sum() / static_cast<double>(n);
    }
  } else {
    d_hidden = std::move(d_features);
  }
  first_.backward(block(0, first_.num_params()), b.first, std::move(d_hidden), g.subspan(0, first_.num_params()));
  for (int k = 0; k < config_.action_dim; ++k) {
    const double raw = b.raw_log_std[k];
    if (raw >= kLogStdMin && raw <= kLogStdMax) grad[log_std_offset_ + k] += d_log_std[k];
  }
  return grad;
}

namespace {

PolicyOutput column_output(const PolicyNetwork::Batch& b, Eigen::Index i) {
  PolicyOutput out;
  out.mean = {b.mean(0, i), b.mean(1, i)};
  out.log_std = {b.log_std[0], b.log_std[1]};
  out.value = b.value[i];
  out.hidden.assign(b.hidden.col(i).data(), b.hidden.col(i).data() + b.hidden.rows());
  return out;
}

}  // namespace

PolicyOutput PolicyNetwork::forward(std::span<const double> obs) const {
  if (config_.mode != Mode::kCTDE) throw std::logic_error("forward: network is in CTCE mode, use forward_ctce");
  if (static_cast<int>(obs.size()) != config_.obs_dim) throw std::invalid_argument("observation size mismatch");
  const Matrix x = Eigen::Map<const Eigen::VectorXd>(obs.data(), config_.obs_dim);
  return column_output(forward_batch(x), 0);
}

std::vector<PolicyOutput> PolicyNetwork::forward_ctce(const std::vector<std::vector<double>>& obs_all,
                                                      std::shared_ptr<const PoolingMatrix> pooling) const {
  if (config_.mode != Mode::kCTCE) throw std::logic_error("forward_ctce: network is in CTDE mode");
  if (obs_all.empty()) throw std::invalid_argument("forward_ctce: no active agents");
  Matrix x(config_.obs_dim, static_cast<Eigen::Index>(obs_all.size()));
  for (std::size_t i = 0; i < obs_all.size(); ++i) {
    if (static_cast<int>(obs_all[i].size()) != config_.obs_dim) throw std::invalid_argument("observation size mismatch");
    x.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::VectorXd>(obs_all[i].data(), config_.obs_dim);
  }
  const Batch b = forward_batch(x, std::move(pooling));
  std::vector<PolicyOutput> out;
  out.reserve(obs_all.size());
  for (Eigen::Index i = 0; i < x.cols(); ++i) out.push_back(column_output(b, i));
  return out;
}

}  // namespace junction::nn
