#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "junction/nn/dense.hpp"
#include "junction/nn/distribution.hpp"
#include "junction/nn/layout.hpp"

namespace junction::nn {

struct PolicyOutput {
  ActionVec mean{};
  ActionVec log_std{};
  double value = 0.0;
  std::vector<double> hidden;  // first-stack output
};

/// Row-stochastic matrix: row i holds the weights agent i pools over.
using PoolingMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Groups columns by id and averages within each group.
PoolingMatrix pooling_by_group(const std::vector<int>& group);
/// Averages each agent over all agents within `radius` meters (itself included).
PoolingMatrix pooling_by_radius(const std::vector<std::array<double, 2>>& positions, double radius);
/// Within each group, averages over members within `radius` meters; a
/// radius of 0 averages over the whole group.
PoolingMatrix pooling_by_group(const std::vector<int>& group, const std::vector<std::array<double, 2>>& positions,
                               double radius);

/// Shared-trunk actor-critic. CTDE runs obs -> hidden... -> heads. CTCE runs
/// obs -> h (first hidden layer), pools h across agents, then [h; pooled] ->
/// remaining hidden layers -> heads. Parameters live here in double precision.
class PolicyNetwork {
 public:
  explicit PolicyNetwork(NetworkConfig config);
  PolicyNetwork(NetworkConfig config, const ModelParameters& params);

  const NetworkConfig& config() const { return config_; }
  const std::vector<LayerDesc>& layout() const { return layout_; }
  std::size_t num_params() const { return theta_.size(); }

  std::span<const double> params() const { return theta_; }
  std::span<double> mutable_params() { return theta_; }
  void set_params(const ModelParameters& params);
  void set_params(std::span<const double> theta);
  /// Float snapshot with the given version.
  ModelParameters to_parameters(std::uint64_t version) const;

  /// CTDE single-agent forward.
  PolicyOutput forward(std::span<const double> obs) const;
  /// CTCE forward over all active agents; `pooling` defaults to the global mean.
  std::vector<PolicyOutput> forward_ctce(const std::vector<std::vector<double>>& obs_all,
                                         std::shared_ptr<const PoolingMatrix> pooling = nullptr) const;

  struct Batch {
    Matrix mean;              // action_dim x N
    Eigen::VectorXd log_std;  // clamped
    Eigen::VectorXd raw_log_std;
    Eigen::RowVectorXd value;
    Matrix hidden;
    Matrix features;  // input to the heads
    Mlp::Cache first, second, mean_head, value_head;
    std::shared_ptr<const PoolingMatrix> pooling;
    bool pooled = false;
  };

  /// Column-batched forward. In CTCE mode every column is an agent and the
  /// pooling matrix (or the global mean) couples them.
  Batch forward_batch(const Matrix& obs, std::shared_ptr<const PoolingMatrix> pooling = nullptr) const;

  /// Gradient of a scalar loss given its partials with respect to the batch
  /// outputs. The log-std partial is with respect to the clamped value.
  std::vector<double> backward(const Batch& batch, const Matrix& d_mean, const Eigen::VectorXd& d_log_std,
                               const Eigen::RowVectorXd& d_value) const;

  /// Rounds the double parameters to float precision in place.
  void round_to_float();

 private:
  std::size_t log_std_offset_ = 0;
  NetworkConfig config_;
  std::vector<LayerDesc> layout_;
  Mlp first_, second_, mean_head_, value_head_;
  std::size_t second_offset_ = 0, mean_offset_ = 0, value_offset_ = 0;
  std::vector<double> theta_;

  std::span<const double> block(std::size_t offset, std::size_t n) const { return {theta_.data() + offset, n}; }
};

}  // namespace junction::nn
