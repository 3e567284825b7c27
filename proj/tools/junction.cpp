// junction: train, evaluate, render and inspect.
//
// Exit codes: 0 success, 1 validation error (bad flags, config, or
// incompatible checkpoint), 2 runtime failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "junction/config/config.hpp"
#include "junction/config/render.hpp"
#include "junction/metrics/metrics.hpp"
#include "junction/nn/checkpoint.hpp"
#include "junction/runtime/actor.hpp"
#include "junction/runtime/evaluate.hpp"
#include "junction/runtime/trainer.hpp"

namespace {

using namespace junction;

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

config::RunConfig load(const std::string& path) {
  const auto env = config::environment_overrides();
  try {
    return path.empty() ? config::parse_config("", env) : config::load_config(path, env);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
}

void apply(config::RunConfig& cfg, const std::string& key, const std::string& value) {
  try {
    config::set_key(cfg, key, value);
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
}

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out,
              bool deterministic, std::optional<int> actors, std::optional<long long> budget) {
  config::RunConfig cfg = load(config_path);
  if (seed) apply(cfg, "runtime.seed", std::to_string(*seed));
  if (!out.empty()) apply(cfg, "io.out_dir", out);
  if (deterministic) apply(cfg, "runtime.deterministic", "true");
  if (actors) apply(cfg, "runtime.actors", std::to_string(*actors));
  if (budget) apply(cfg, "runtime.budget_updates", std::to_string(*budget));

  std::cerr << "config " << config::hash_hex(cfg.hash()) << ", " << algos::algo_name(cfg.algo) << "/"
            << nn::mode_name(cfg.network.mode) << ", " << cfg.runtime.actors << " actor(s)\n";
  runtime::TrainHooks hooks;
  hooks.on_update = [&](const algos::UpdateStats&, const runtime::RunStats& s) {
    if (s.updates % 10 == 0) std::cerr << s.to_json() << '\n';
  };
  const auto result = runtime::run_training(cfg, hooks);
  std::cout << result.stats.to_json() << '\n';
  if (!result.final_checkpoint.empty()) std::cerr << "wrote " << result.final_checkpoint.string() << '\n';
  return kOk;
}

int cmd_evaluate(const std::string& config_path, const std::string& checkpoint, std::optional<std::uint64_t> seed,
                 std::optional<int> episodes, const std::string& out) {
  config::RunConfig cfg = load(config_path);
  if (seed) apply(cfg, "eval.seed", std::to_string(*seed));
  if (episodes) apply(cfg, "eval.episodes", std::to_string(*episodes));
  const std::filesystem::path dir = out.empty() ? std::filesystem::path(cfg.io.out_dir) / "eval" : std::filesystem::path(out);
  const nn::Checkpoint ckpt = nn::load_checkpoint(checkpoint);
  std::filesystem::create_directories(dir);
  runtime::EvalOptions opt{cfg.eval.episodes, cfg.eval.seed, cfg.io.save_logs ? dir / "logs" : std::filesystem::path{},
                           cfg.hash()};
  metrics::MetricsReport report;
  try {
    report = runtime::evaluate_checkpoint(ckpt, cfg.network, runtime::env_config(cfg), opt);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  std::ofstream(dir / "metrics.csv") << metrics::report_csv(report);
  std::ofstream(dir / "metrics.json") << metrics::report_json(report) << '\n';
  std::cout << metrics::report_csv(report);
  return kOk;
}

int cmd_render(const std::string& log_path, const std::string& out, bool no_lidar, double scale) {
  const metrics::TrajectoryLog log = metrics::load_log(log_path);
  try {
    log.validate();
  } catch (const std::invalid_argument& e) {
    if (!log.records.empty() || log.complete) throw ValidationError(e.what());
  }
  config::RenderOptions opt;
  opt.front_sector = !no_lidar;
  opt.pixels_per_meter = scale;
  const int frames = config::render_frames(log, out, opt);
  std::cout << frames << " frame(s) written to " << out << '\n';
  return kOk;
}

int cmd_inspect_checkpoint(const std::string& path) {
  const nn::Checkpoint c = nn::load_checkpoint(path);
  nlohmann::ordered_json j{{"version", c.params.version},
                           {"mode", nn::mode_name(c.mode)},
                           {"config_hash", config::hash_hex(c.config_hash)},
                           {"values", c.params.values.size()}};
  auto& layers = j["layers"] = nlohmann::ordered_json::array();
  static const char* roles[] = {"hidden", "mean_head", "log_std", "value_head"};
  for (const auto& d : c.params.layout) {
    layers.push_back({{"role", roles[static_cast<int>(d.role)]}, {"in", d.in}, {"out", d.out}});
  }
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_inspect_config(const std::string& path) {
  const config::RunConfig cfg = load(path);
  std::cout << "# hash " << config::hash_hex(cfg.hash()) << '\n' << cfg.canonical();
  return kOk;
}

int cmd_inspect_log(const std::string& path) {
  const metrics::TrajectoryLog log = metrics::load_log(path);
  metrics::EpisodeMetrics m;
  try {
    m = metrics::compute_episode_metrics(log);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  metrics::MetricsReport r = metrics::aggregate({m}, 0, {log.header.seed});
  std::cout << metrics::report_csv(r);
  return kOk;
}

// One collection round with freshly initialized parameters, summarized per segment.
int cmd_inspect_segments(const std::string& config_path) {
  const config::RunConfig cfg = load(config_path);
  runtime::Actor actor(runtime::env_config(cfg), cfg.network,
                       {0, cfg.runtime.horizon, cfg.algo, cfg.hyper.ddpg_noise, runtime::derive_seed(cfg.runtime.seed, 100)});
  const auto params = std::make_shared<const nn::ModelParameters>(
      nn::init_params(cfg.network, runtime::derive_seed(cfg.runtime.seed, 0)));
  for (const auto& s : actor.collect(params)) {
    double ret = 0.0;
    int dones = 0;
    for (int t = 0; t < s.horizon; ++t) {
      ret += s.rewards[t];
      dones += s.dones[t] && s.valid[t];
    }
    std::cout << nlohmann::ordered_json{{"agent", s.agent_id},     {"env", s.env_id},       {"version", s.model_version},
                                        {"horizon", s.horizon},    {"valid", s.num_valid()}, {"dones", dones},
                                        {"reward_sum", ret},       {"bootstrap_value", s.bootstrap_value}}
                     .dump()
              << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent intersection training and evaluation"};
  app.require_subcommand(1);

  std::string config_path, out, checkpoint, log_path, target;
  std::optional<std::uint64_t> seed;
  std::optional<int> actors, episodes;
  std::optional<long long> budget;
  bool deterministic = false, no_lidar = false;
  double scale = 4.0;

  auto* train = app.add_subcommand("train", "Run actor-learner training");
  train->add_option("--config", config_path, "Config file (sectioned key = value)");
  train->add_option("--seed", seed, "Overrides runtime.seed");
  train->add_option("--out", out, "Overrides io.out_dir");
  train->add_flag("--deterministic", deterministic, "Single-threaded reproducible mode");
  train->add_option("--actors", actors, "Overrides runtime.actors");
  train->add_option("--budget", budget, "Overrides runtime.budget_updates");

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint with deterministic actions");
  evaluate->add_option("--config", config_path, "Config file");
  evaluate->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  evaluate->add_option("--seed", seed, "Overrides eval.seed");
  evaluate->add_option("--episodes", episodes, "Overrides eval.episodes");
  evaluate->add_option("--out", out, "Output directory (default <io.out_dir>/eval)");

  auto* render = app.add_subcommand("render", "Render a trajectory log to PPM frames");
  render->add_option("--log", log_path, "Trajectory log (.jsonl)")->required();
  render->add_option("--out", out, "Frame directory")->required();
  render->add_flag("--no-lidar", no_lidar, "Omit the front-sector overlay");
  render->add_option("--scale", scale, "Pixels per meter")->check(CLI::PositiveNumber);

  auto* inspect = app.add_subcommand("inspect", "Dump a checkpoint, config, log or freshly collected segments");
  inspect->add_option("what", target, "checkpoint | config | log | segments")
      ->required()
      ->check(CLI::IsMember({"checkpoint", "config", "log", "segments"}));
  inspect->add_option("path", log_path, "File to inspect (config file for 'segments')");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (train->parsed()) return cmd_train(config_path, seed, out, deterministic, actors, budget);
    if (evaluate->parsed()) return cmd_evaluate(config_path, checkpoint, seed, episodes, out);
    if (render->parsed()) return cmd_render(log_path, out, no_lidar, scale);
    if (target == "checkpoint") return cmd_inspect_checkpoint(log_path);
    if (target == "config") return cmd_inspect_config(log_path);
    if (target == "log") return cmd_inspect_log(log_path);
    return cmd_inspect_segments(log_path);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}
