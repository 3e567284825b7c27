#pragma once

#include <array>
#include <random>

namespace junction::nn {

using ActionVec = std::array<double, 2>;

constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;
/// Squashed actions are kept within +-(1 - kActionEps) so atanh stays finite.
constexpr double kActionEps = 1e-6;

struct SampledAction {
  ActionVec action{};
  ActionVec pre_tanh{};
  double log_prob = 0.0;
};

/// log(1 - tanh(u)^2), stable for large |u|.
double log1m_tanh_sq(double u);

/// u ~ N(mean, exp(log_std)), action = tanh(u). The log-density includes the
/// tanh change of variables and is evaluated at the unclamped u.
SampledAction sample_action(const ActionVec& mean, const ActionVec& log_std, std::mt19937_64& rng);

double log_prob(const ActionVec& mean, const ActionVec& log_std, const ActionVec& action);

struct LogProbGrad {
  double log_prob = 0.0;
  ActionVec d_mean{};
  ActionVec d_log_std{};
};
/// Log-density of a fixed action and its partials with respect to mean and log-std.
LogProbGrad log_prob_grad(const ActionVec& mean, const ActionVec& log_std, const ActionVec& action);

/// The same density addressed by the pre-squash sample u. Unlike the action
/// form it stays exact when tanh(u) rounds to +-1, so on-policy learners
/// score stored samples with it.
LogProbGrad log_prob_grad_pre_tanh(const ActionVec& mean, const ActionVec& log_std, const ActionVec& u);
double log_prob_pre_tanh(const ActionVec& mean, const ActionVec& log_std, const ActionVec& u);

ActionVec deterministic_action(const ActionVec& mean);

/// Entropy of the pre-squash Gaussian.
double gaussian_entropy(const ActionVec& log_std);

double clamp_log_std(double v);

}  // namespace junction::nn
