#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace junction::algos {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Backward recursion
///   delta_t = r_t + gamma V_{t+1} (1 - done_t) - V_t
///   A_t     = delta_t + gamma lambda (1 - done_t) A_{t+1}
/// with V_T = bootstrap. Returns are A + V. Throws on length mismatch.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap, double gamma, double lambda);

/// (A - mean) / (population std + 1e-8) over the entries where `mask` is
/// nonzero (all entries when the mask is empty). Masked-out entries are set to 0.
void normalize_advantages(std::vector<double>& advantages, std::span<const std::uint8_t> mask = {});

/// Welford running mean/variance, used for optional reward scaling.
class RunningMeanStd {
 public:
  void update(double x);
  double mean() const { return mean_; }
  double variance() const { return count_ > 1 ? m2_ / static_cast<double>(count_) : 1.0; }
  double std() const;
  long long count() const { return count_; }

 private:
  long long count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace junction::algos
