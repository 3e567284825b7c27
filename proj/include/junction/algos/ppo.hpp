#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "junction/algos/adam.hpp"
#include "junction/algos/hyperparams.hpp"
#include "junction/nn/policy.hpp"

namespace junction::algos {

/// Flattened on-policy batch, one sample per column of `obs`. In CTCE mode
/// columns sharing a `group` id were observed together and are pooled
/// together; columns with trainable == 0 only feed the pool (peers whose own
/// samples are not in the batch).
struct PpoBatch {
  nn::Matrix obs;
  std::vector<nn::ActionVec> actions;  // pre-squash samples u, action = tanh(u)
  std::vector<double> old_log_probs;
  std::vector<double> advantages;
  std::vector<double> returns;
  std::vector<int> group;
  std::vector<std::uint8_t> trainable;
  /// Per-column positions, required in CTCE when the network pools by radius.
  std::vector<std::array<double, 2>> positions;

  std::size_t size() const { return static_cast<std::size_t>(obs.cols()); }
  bool is_trainable(std::size_t i) const { return trainable.empty() || trainable[i] != 0; }
  std::size_t num_trainable() const;
  void validate() const;
};

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double grad_norm = 0.0;
  std::size_t samples = 0;
  std::uint64_t version = 0;
};

/// min(rho A, clip(rho, 1 - eps, 1 + eps) A).
double clipped_surrogate(double ratio, double advantage, double eps);

class PpoLearner {
 public:
  PpoLearner(nn::NetworkConfig config, const nn::ModelParameters& init, Hyperparams hyper, std::uint64_t seed);

  /// `epochs` passes of shuffled minibatch Adam steps over the batch; the
  /// version advances by one. Throws std::invalid_argument on an empty batch.
  UpdateStats update(const PpoBatch& batch);
  /// Loss statistics of the current parameters on a batch, without updating.
  UpdateStats evaluate(const PpoBatch& batch) const;

  nn::ModelParameters snapshot() const { return net_.to_parameters(version_); }
  const nn::PolicyNetwork& network() const { return net_; }
  std::uint64_t version() const { return version_; }
  const Hyperparams& hyper() const { return hyper_; }

 private:
  struct Loss {
    double policy = 0.0, value = 0.0, entropy = 0.0, clip_fraction = 0.0, kl = 0.0;
    std::size_t n = 0;
  };
  Loss minibatch_loss(const PpoBatch& batch, const std::vector<std::size_t>& cols, std::vector<double>* grad) const;

  nn::PolicyNetwork net_;
  Hyperparams hyper_;
  Adam adam_;
  std::mt19937_64 rng_;
  std::uint64_t version_ = 0;
};

}  // namespace junction::algos
