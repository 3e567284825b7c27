#pragma once

#include <Eigen/Dense>
#include <random>
#include <span>
#include <vector>

namespace junction::nn {

using Matrix = Eigen::MatrixXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Stack of fully connected layers over column-major batches (one sample per
/// column). Hidden layers use tanh; the last layer is linear unless
/// `tanh_output` is set. A single size means the identity map.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> sizes, bool tanh_output);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  const std::vector<int>& sizes() const { return sizes_; }
  std::size_t num_params() const;
  std::size_t layer_offset(int layer) const;

  void init_uniform(std::span<double> theta, std::mt19937_64& rng, double last_scale = 1.0) const;

  struct Cache {
    std::vector<Matrix> acts;  // acts[0] is the input, acts[k] the output of layer k
  };

  Matrix forward(std::span<const double> theta, const Matrix& x, Cache* cache = nullptr) const;

  /// Accumulates parameter gradients into `grad` and returns dL/dx.
  Matrix backward(std::span<const double> theta, const Cache& cache, Matrix dout, std::span<double> grad) const;

 private:
  bool activated(int layer) const { return layer + 1 < num_layers() || tanh_output_; }

  std::vector<int> sizes_{1};
  bool tanh_output_ = false;
};

}  // namespace junction::nn
