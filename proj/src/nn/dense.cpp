#include "junction/nn/dense.hpp"

#include <cmath>
#include <stdexcept>

namespace junction::nn {

namespace {
using ConstRowMap = Eigen::Map<const RowMajorMatrix>;
using RowMap = Eigen::Map<RowMajorMatrix>;
}  // namespace

Mlp::Mlp(std::vector<int> sizes, bool tanh_output) : sizes_(std::move(sizes)), tanh_output_(tanh_output) {
  if (sizes_.empty()) throw std::invalid_argument("Mlp needs at least an input size");
}

std::size_t Mlp::num_params() const { return layer_offset(num_layers()); }

std::size_t Mlp::layer_offset(int layer) const {
  std::size_t n = 0;
  for (int k = 0; k < layer; ++k) n += static_cast<std::size_t>(sizes_[k]) * sizes_[k + 1] + sizes_[k + 1];
  return n;
}

void Mlp::init_uniform(std::span<double> theta, std::mt19937_64& rng, double last_scale) const {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int k = 0; k < num_layers(); ++k) {
    const double bound = std::sqrt(1.0 / sizes_[k]) * (k + 1 == num_layers() ? last_scale : 1.0);
    const std::size_t n = static_cast<std::size_t>(sizes_[k]) * sizes_[k + 1] + sizes_[k + 1];
    double* p = theta.data() + layer_offset(k);
    for (std::size_t i = 0; i < n; ++i) p[i] = bound * unit(rng);
  }
}

Matrix Mlp::forward(std::span<const double> theta, const Matrix& x, Cache* cache) const {
  if (x.rows() != input_size()) throw std::invalid_argument("Mlp::forward: input size mismatch");
  if (theta.size() < num_params()) throw std::invalid_argument("Mlp::forward: parameter span too small");
  if (cache) {
    cache->acts.clear();
    cache->acts.push_back(x);
  }
  Matrix a = x;
  for (int k = 0; k < num_layers(); ++k) {
    const int in = sizes_[k], out = sizes_[k + 1];
    const double* p = theta.data() + layer_offset(k);
    ConstRowMap w(p, out, in);
    Eigen::Map<const Eigen::VectorXd> b(p + static_cast<std::size_t>(in) * out, out);
    Matrix z = w * a;
    z.colwise() += b;
    if (activated(k)) z = z.array().tanh().matrix();
    a = std::move(z);
    if (cache) cache->acts.push_back(a);
  }
  return a;
}

Matrix Mlp::backward(std::span<const double> theta, const Cache& cache, Matrix dout, std::span<double> grad) const {
  if (static_cast<int>(cache.acts.size()) != num_layers() + 1) throw std::invalid_argument("Mlp::backward: stale cache");
  for (int k = num_layers() - 1; k >= 0; --k) {
    const int in = sizes_[k], out = sizes_[k + 1];
    const std::size_t off = layer_offset(k);
    if (activated(k)) dout = (dout.array() * (1.0 - cache.acts[k + 1].array().square())).matrix();
    RowMap gw(grad.data() + off, out, in);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + off + static_cast<std::size_t>(in) * out, out);
    gw.noalias() += dout * cache.acts[k].transpose();
    gb += dout.rowwise().sum();
    ConstRowMap w(theta.data() + off, out, in);
    dout = w.transpose() * dout;
  }
  return dout;
}

}  // namespace junction::nn
