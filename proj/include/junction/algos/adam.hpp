#pragma once

#include <span>
#include <vector>

namespace junction::algos {

class Adam {
 public:
  explicit Adam(std::size_t n, double lr = 3e-4, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(std::span<double> theta, std::span<const double> grad);
  long long steps() const { return t_; }
  double learning_rate() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
  std::vector<double> m_, v_;
};

/// Scales `grad` in place so its L2 norm is at most `max_norm` (no-op when
/// max_norm <= 0). Returns the norm before clipping.
double clip_grad_norm(std::span<double> grad, double max_norm);

}  // namespace junction::algos
