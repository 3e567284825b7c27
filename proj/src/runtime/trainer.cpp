#include "junction/runtime/trainer.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <future>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "junction/nn/checkpoint.hpp"
#include "junction/runtime/actor.hpp"
#include "junction/runtime/buffer.hpp"
#include "junction/runtime/evaluate.hpp"
#include "junction/runtime/learner.hpp"
#include "junction/runtime/param_store.hpp"

namespace junction::runtime {

using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string RunStats::to_json() const {
  return ordered_json{{"wall_seconds", wall_seconds},
                      {"env_steps", env_steps},
                      {"env_steps_per_sec", env_steps_per_sec},
                      {"produced", produced},
                      {"consumed", consumed},
                      {"discarded", discarded},
                      {"queued", queued},
                      {"discard_fraction", discard_fraction},
                      {"updates", updates},
                      {"updates_per_minute", updates_per_minute},
                      {"version", version},
                      {"last_batch_gap", last_batch_gap},
                      {"episodes", episodes},
                      {"episode_success", episode_success},
                      {"episode_crash_vehicle", episode_crash_vehicle}}
      .dump();
}

EnvConfig env_config(const config::RunConfig& config) { return {config.sim, config.rewards}; }

namespace {

ordered_json update_json(const algos::UpdateStats& u) {
  return {{"policy_loss", u.policy_loss}, {"value_loss", u.value_loss}, {"entropy", u.entropy},
          {"clip_fraction", u.clip_fraction}, {"approx_kl", u.approx_kl}, {"grad_norm", u.grad_norm},
          {"samples", u.samples}};
}

ordered_json report_record(std::uint64_t version, const metrics::MetricsReport& r) {
  ordered_json j{{"version", version}, {"episodes", r.episodes}};
  const auto v = r.mean.values();
  for (std::size_t k = 0; k < metrics::kNumMetrics; ++k) j[metrics::kMetricLabels[k]] = v[k];
  return j;
}

class Trainer {
 public:
  Trainer(const config::RunConfig& config, const TrainHooks& hooks)
      : cfg_(config),
        hooks_(hooks),
        env_(env_config(config)),
        store_(nn::init_params(config.network, derive_seed(config.runtime.seed, 0))),
        learner_(config.network, config.algo, config.hyper, *store_.fetch(), derive_seed(config.runtime.seed, 1)),
        buffer_(BufferConfig{config.runtime.horizon, config.runtime.batch_segments, config.runtime.capacity,
                             config.runtime.max_avg_version_gap,
                             learner_.on_policy() ? BufferMode::kFifo : BufferMode::kReplay}),
        sample_rng_(derive_seed(config.runtime.seed, 2)) {
    for (int a = 0; a < cfg_.runtime.actors; ++a) {
      ActorOptions o{a, cfg_.runtime.horizon, cfg_.algo, cfg_.hyper.ddpg_noise, derive_seed(cfg_.runtime.seed, 100 + a)};
      actors_.push_back(std::make_unique<Actor>(env_, cfg_.network, o));
    }
    if (!cfg_.io.out_dir.empty()) {
      out_ = cfg_.io.out_dir;
      std::filesystem::create_directories(out_ / "checkpoints");
      stats_.open(out_ / "stats.jsonl", std::ios::trunc);
      if (!stats_) throw std::runtime_error("cannot write " + (out_ / "stats.jsonl").string());
      std::ofstream(out_ / "config.ini") << cfg_.canonical();
    }
  }

  TrainResult run() {
    start_ = Clock::now();
    if (cfg_.runtime.deterministic) {
      run_deterministic();
    } else {
      run_threaded();
    }
    if (pending_eval_.valid()) finish_eval(pending_eval_.get());

    TrainResult result;
    result.stats = stats();
    result.final_params = *store_.fetch();
    result.history = std::move(history_);
    if (!out_.empty()) {
      result.final_checkpoint = out_ / "final.ckpt";
      nn::save_checkpoint(result.final_checkpoint, {result.final_params, cfg_.network.mode, cfg_.hash()});
      write_manifest(result.stats);
    }
    return result;
  }

 private:
  bool budget_spent() const {
    const auto& r = cfg_.runtime;
    if (r.budget_updates > 0 && updates_ >= r.budget_updates) return true;
    return r.budget_seconds > 0.0 && elapsed() >= r.budget_seconds;
  }

  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  void hand_off(Actor& actor, std::vector<TrajectorySegment>&& segs) {
    for (auto& s : segs) buffer_.push(std::make_shared<const TrajectorySegment>(std::move(s)));
    env_steps_ += cfg_.runtime.horizon;
    const EpisodeTally t = actor.take_tally();
    std::lock_guard lock(tally_mu_);
    tally_.episodes += t.episodes;
    tally_.success += t.success;
    tally_.crash_vehicle += t.crash_vehicle;
  }

  bool replay_ready() const {
    const long long need = std::max<long long>(cfg_.runtime.warmup_transitions, 1);
    return buffer_.valid_transitions() >= need;
  }

  void off_policy_update() {
    after_update(learner_.update(buffer_.sample_transitions(cfg_.hyper.replay_batch_size, sample_rng_)));
  }

  void run_deterministic() {
    while (!budget_spent()) {
      for (auto& a : actors_) hand_off(*a, a->collect(store_.fetch()));
      if (learner_.on_policy()) {
        while (!budget_spent()) {
          auto batch = buffer_.try_sample(learner_.version());
          if (!batch) break;
          after_update(learner_.update(*batch));
        }
      } else if (replay_ready()) {
        for (int k = 0; k < cfg_.runtime.updates_per_round && !budget_spent(); ++k) off_policy_update();
      }
    }
  }

  void run_threaded() {
    std::atomic<bool> stop{false};
    std::mutex err_mu;
    std::string error;
    std::vector<std::thread> threads;
    for (auto& a : actors_) {
      threads.emplace_back([&, actor = a.get()] {
        try {
          while (!stop.load()) hand_off(*actor, actor->collect(store_.fetch()));
        } catch (const std::exception& e) {
          std::lock_guard lock(err_mu);
          if (error.empty()) error = e.what();
          stop = true;
          buffer_.close();
        }
      });
    }
    try {
      while (!budget_spent() && !stop.load()) {
        if (learner_.on_policy()) {
          auto batch = buffer_.sample_batch(learner_.version(), std::chrono::milliseconds(100));
          if (batch) after_update(learner_.update(*batch));
        } else if (replay_ready()) {
          off_policy_update();
        } else {
          std::this_thread::sleep_for(std::chrono::milliseconds(2));
        }
      }
    } catch (...) {
      stop = true;
      buffer_.close();
      for (auto& t : threads) t.join();
      throw;
    }
    stop = true;
    buffer_.close();
    for (auto& t : threads) t.join();
    if (!error.empty()) throw std::runtime_error("actor worker failed: " + error);
  }

  void after_update(const algos::UpdateStats& u) {
    const std::uint64_t v = store_.publish(learner_.snapshot());
    if (v != u.version) throw std::logic_error("published version diverged from the learner");
    ++updates_;
    history_.push_back(u);
    const RunStats s = stats();
    if (stats_.is_open() && updates_ % cfg_.io.stats_every == 0) {
      ordered_json j{{"update", updates_}};
      j.update(ordered_json::parse(s.to_json()));
      j.update(update_json(u));
      stats_ << j.dump() << '\n';
      stats_.flush();
    }
    if (!out_.empty() && cfg_.io.checkpoint_every > 0 && updates_ % cfg_.io.checkpoint_every == 0) {
      nn::save_checkpoint(out_ / "checkpoints" / ("v" + std::to_string(v) + ".ckpt"),
                          {*store_.fetch(), cfg_.network.mode, cfg_.hash()});
    }
    if (cfg_.io.eval_every > 0 && updates_ % cfg_.io.eval_every == 0) start_eval();
    if (hooks_.on_update) hooks_.on_update(u, s);
  }

  void start_eval() {
    if (pending_eval_.valid()) {
      if (!cfg_.runtime.deterministic && pending_eval_.wait_for(std::chrono::seconds(0)) != std::future_status::ready) {
        return;  // previous evaluation still running; skip this one
      }
      finish_eval(pending_eval_.get());
    }
    const ParamsPtr snap = store_.fetch();
    EvalOptions opt{cfg_.eval.periodic_episodes, cfg_.eval.seed, {}, cfg_.hash()};
    auto job = [snap, opt, net = cfg_.network, env = env_]() {
      return std::make_pair(snap->version, evaluate(greedy_policy(nn::PolicyNetwork(net, *snap)), env, opt));
    };
    if (cfg_.runtime.deterministic) {
      finish_eval(job());
    } else {
      pending_eval_ = std::async(std::launch::async, job);
    }
  }

  void finish_eval(const std::pair<std::uint64_t, metrics::MetricsReport>& r) {
    if (out_.empty()) return;
    std::ofstream f(out_ / "eval.jsonl", std::ios::app);
    f << report_record(r.first, r.second).dump() << '\n';
  }

  RunStats stats() const {
    RunStats s;
    s.wall_seconds = elapsed();
    s.env_steps = env_steps_.load();
    s.env_steps_per_sec = s.wall_seconds > 0 ? static_cast<double>(s.env_steps) / s.wall_seconds : 0.0;
    const BufferCounters c = buffer_.counters();
    s.produced = c.produced;
    s.consumed = c.consumed;
    s.discarded = c.discarded;
    s.queued = c.queued;
    s.discard_fraction = c.discard_fraction();
    s.last_batch_gap = c.last_batch_gap;
    s.updates = updates_;
    s.updates_per_minute = s.wall_seconds > 0 ? 60.0 * static_cast<double>(updates_) / s.wall_seconds : 0.0;
    s.version = store_.version();
    std::lock_guard lock(tally_mu_);
    s.episodes = tally_.episodes;
    if (tally_.episodes > 0) {
      s.episode_success = tally_.success / static_cast<double>(tally_.episodes);
      s.episode_crash_vehicle = tally_.crash_vehicle / static_cast<double>(tally_.episodes);
    }
    return s;
  }

  void write_manifest(const RunStats& s) const {
    ordered_json m{{"config_hash", config::hash_hex(cfg_.hash())},
                   {"algo", algos::algo_name(cfg_.algo)},
                   {"mode", nn::mode_name(cfg_.network.mode)},
                   {"seed", cfg_.runtime.seed},
                   {"eval_seed", cfg_.eval.seed},
                   {"actors", cfg_.runtime.actors},
                   {"deterministic", cfg_.runtime.deterministic},
                   {"final_version", s.version},
                   {"updates", s.updates},
                   {"env_steps", s.env_steps},
                   {"discard_fraction", s.discard_fraction},
                   {"wall_seconds", s.wall_seconds},
                   {"checkpoint", "final.ckpt"}};
    std::ofstream(out_ / "manifest.json") << m.dump(2) << '\n';
  }

  const config::RunConfig& cfg_;
  const TrainHooks& hooks_;
  EnvConfig env_;
  ParameterStore store_;
  Learner learner_;
  SegmentBuffer buffer_;
  std::mt19937_64 sample_rng_;
  std::vector<std::unique_ptr<Actor>> actors_;
  std::filesystem::path out_;
  std::ofstream stats_;
  Clock::time_point start_;
  std::atomic<long long> env_steps_{0};
  long long updates_ = 0;
  std::vector<algos::UpdateStats> history_;
  mutable std::mutex tally_mu_;
  EpisodeTally tally_;
  std::future<std::pair<std::uint64_t, metrics::MetricsReport>> pending_eval_;
};

}  // namespace

TrainResult run_training(const config::RunConfig& config, const TrainHooks& hooks) {
  config.validate();
  Trainer trainer(config, hooks);
  return trainer.run();
}

ThroughputSample measure_actor_throughput(const config::RunConfig& config, int actors, double seconds) {
  config.validate();
  if (actors < 1) throw std::invalid_argument("runtime.actors: must be >= 1");
  const ParamsPtr snap =
      std::make_shared<const nn::ModelParameters>(nn::init_params(config.network, derive_seed(config.runtime.seed, 0)));
  std::atomic<bool> stop{false};
  std::atomic<long long> steps{0};
  std::vector<std::thread> threads;
  const auto start = Clock::now();
  for (int a = 0; a < actors; ++a) {
    threads.emplace_back([&, a] {
      Actor actor(env_config(config), config.network,
                  {a, config.runtime.horizon, config.algo, config.hyper.ddpg_noise, derive_seed(config.runtime.seed, 100 + a)});
      while (!stop.load()) {
        actor.collect(snap);
        steps += config.runtime.horizon;
      }
    });
  }
  std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
  stop = true;
  for (auto& t : threads) t.join();
  ThroughputSample s;
  s.actors = actors;
  s.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  s.env_steps = steps.load();
  s.env_steps_per_sec = static_cast<double>(s.env_steps) / s.seconds;
  return s;
}

}  // namespace junction::runtime
