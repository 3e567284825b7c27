#include "junction/algos/gae.hpp"

#include <cmath>
#include <stdexcept>

namespace junction::algos {

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) throw std::invalid_argument("compute_gae: length mismatch");
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_value = bootstrap;
  double next_adv = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double live = dones[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * next_value * live - values[k];
    next_adv = delta + gamma * lambda * live * next_adv;
    out.advantages[k] = next_adv;
    out.returns[k] = next_adv + values[k];
    next_value = values[k];
  }
  return out;
}

void normalize_advantages(std::vector<double>& a, std::span<const std::uint8_t> mask) {
  if (!mask.empty() && mask.size() != a.size()) throw std::invalid_argument("normalize_advantages: mask length");
  auto on = [&](std::size_t i) { return mask.empty() || mask[i] != 0; };
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (on(i)) {
      sum += a[i];
      ++n;
    }
  }
  if (n == 0) {
    std::fill(a.begin(), a.end(), 0.0);
    return;
  }
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (on(i)) ss += (a[i] - mean) * (a[i] - mean);
  }
  const double denom = std::sqrt(ss / static_cast<double>(n)) + 1e-8;
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = on(i) ? (a[i] - mean) / denom : 0.0;
}

void RunningMeanStd::update(double x) {
  ++count_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(count_);
  m2_ += d * (x - mean_);
}

double RunningMeanStd::std() const { return std::sqrt(variance()) + 1e-8; }

}  // namespace junction::algos
