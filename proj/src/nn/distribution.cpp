#include "junction/nn/distribution.hpp"

#include <algorithm>
#include <cmath>

namespace junction::nn {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

double gaussian_log_density(double u, double mean, double log_std) {
  const double z = (u - mean) * std::exp(-log_std);
  return -0.5 * z * z - log_std - kHalfLog2Pi;
}

}  // namespace

double clamp_log_std(double v) { return std::clamp(v, kLogStdMin, kLogStdMax); }

double log1m_tanh_sq(double u) {
  const double a = std::abs(u);
  return 2.0 * (std::log(2.0) - a - std::log1p(std::exp(-2.0 * a)));
}

SampledAction sample_action(const ActionVec& mean, const ActionVec& log_std, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  SampledAction s;
  for (std::size_t k = 0; k < mean.size(); ++k) {
    const double ls = clamp_log_std(log_std[k]);
    s.pre_tanh[k] = mean[k] + std::exp(ls) * normal(rng);
    s.action[k] = std::clamp(std::tanh(s.pre_tanh[k]), -1.0 + kActionEps, 1.0 - kActionEps);
  }
  s.log_prob = log_prob_pre_tanh(mean, log_std, s.pre_tanh);
  return s;
}

double log_prob(const ActionVec& mean, const ActionVec& log_std, const ActionVec& action) {
  return log_prob_grad(mean, log_std, action).log_prob;
}

LogProbGrad log_prob_grad(const ActionVec& mean, const ActionVec& log_std, const ActionVec& action) {
  ActionVec u{};
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = std::atanh(std::clamp(action[k], -1.0 + kActionEps, 1.0 - kActionEps));
  return log_prob_grad_pre_tanh(mean, log_std, u);
}

double log_prob_pre_tanh(const ActionVec& mean, const ActionVec& log_std, const ActionVec& u) {
  return log_prob_grad_pre_tanh(mean, log_std, u).log_prob;
}

LogProbGrad log_prob_grad_pre_tanh(const ActionVec& mean, const ActionVec& log_std, const ActionVec& pre_tanh) {
  LogProbGrad g;
  for (std::size_t k = 0; k < mean.size(); ++k) {
    const double u = pre_tanh[k];
    const double ls = clamp_log_std(log_std[k]);
    const double inv_var = std::exp(-2.0 * ls);
    const double diff = u - mean[k];
    g.log_prob += gaussian_log_density(u, mean[k], ls) - log1m_tanh_sq(u);
    g.d_mean[k] = diff * inv_var;
    g.d_log_std[k] = diff * diff * inv_var - 1.0;
  }
  return g;
}

ActionVec deterministic_action(const ActionVec& mean) { return {std::tanh(mean[0]), std::tanh(mean[1])}; }

double gaussian_entropy(const ActionVec& log_std) {
  double h = 0.0;
  for (double ls : log_std) h += 0.5 + kHalfLog2Pi + clamp_log_std(ls);
  return h;
}

}  // namespace junction::nn
