#include "junction/runtime/evaluate.hpp"

#include <memory>
#include <stdexcept>

#include "junction/nn/distribution.hpp"

namespace junction::runtime {

JointPolicy greedy_policy(const nn::PolicyNetwork& network) {
  auto net = std::make_shared<const nn::PolicyNetwork>(network);
  return [net](const Environment& env) {
    std::vector<sim::Action> actions(env.num_agents());
    const std::vector<int> agents = env.active_agents();
    if (agents.empty()) return actions;
    const int d = env.obs_dim();
    nn::Matrix x(d, static_cast<Eigen::Index>(agents.size()));
    std::vector<std::array<double, 2>> pos;
    for (std::size_t k = 0; k < agents.size(); ++k) {
      x.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::VectorXd>(env.observation(agents[k]).data(), d);
      const auto& p = env.world().state().vehicles[agents[k]].position;
      pos.push_back({p.x, p.y});
    }
    std::shared_ptr<const nn::PoolingMatrix> pool;
    if (net->config().mode == nn::Mode::kCTCE && net->config().pooling_radius > 0.0) {
      pool = std::make_shared<nn::PoolingMatrix>(nn::pooling_by_radius(pos, net->config().pooling_radius));
    }
    const auto fwd = net->forward_batch(x, pool);
    for (std::size_t k = 0; k < agents.size(); ++k) {
      const auto j = static_cast<Eigen::Index>(k);
      const nn::ActionVec a = nn::deterministic_action({fwd.mean(0, j), fwd.mean(1, j)});
      actions[agents[k]] = {a[0], a[1]};
    }
    return actions;
  };
}

JointPolicy constant_policy(sim::Action action) {
  return [action](const Environment& env) { return std::vector<sim::Action>(env.num_agents(), action); };
}

metrics::TrajectoryLog run_episode(const JointPolicy& policy, const EnvConfig& config, std::uint64_t seed) {
  Environment env(config, true);
  env.reset(seed);
  while (!env.episode_done()) env.step(policy(env));
  return env.log();
}

std::vector<metrics::EpisodeMetrics> evaluate_episodes(const JointPolicy& policy, const EnvConfig& env,
                                                       const EvalOptions& options) {
  if (options.episodes < 1) throw std::invalid_argument("eval.episodes: must be >= 1");
  if (!options.log_dir.empty()) std::filesystem::create_directories(options.log_dir);
  std::vector<metrics::EpisodeMetrics> out;
  for (int k = 0; k < options.episodes; ++k) {
    const std::uint64_t seed = options.base_seed + static_cast<std::uint64_t>(k);
    const metrics::TrajectoryLog log = run_episode(policy, env, seed);
    if (!options.log_dir.empty()) {
      metrics::save_log(options.log_dir / ("episode_" + std::to_string(seed) + ".jsonl"), log);
    }
    out.push_back(metrics::compute_episode_metrics(log));
  }
  return out;
}

metrics::MetricsReport evaluate(const JointPolicy& policy, const EnvConfig& env, const EvalOptions& options) {
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < options.episodes; ++k) seeds.push_back(options.base_seed + static_cast<std::uint64_t>(k));
  return metrics::aggregate(evaluate_episodes(policy, env, options), options.config_hash, std::move(seeds));
}

metrics::MetricsReport evaluate_checkpoint(const nn::Checkpoint& checkpoint, const nn::NetworkConfig& network,
                                           const EnvConfig& env, const EvalOptions& options) {
  if (checkpoint.mode != network.mode) {
    throw std::invalid_argument(std::string("checkpoint mode ") + nn::mode_name(checkpoint.mode) +
                                " does not match network.mode " + nn::mode_name(network.mode));
  }
  if (checkpoint.params.layout != nn::make_layout(network)) {
    throw std::invalid_argument("checkpoint layout (obs_dim or hidden sizes) does not match the configured network");
  }
  return evaluate(greedy_policy(nn::PolicyNetwork(network, checkpoint.params)), env, options);
}

}  // namespace junction::runtime
