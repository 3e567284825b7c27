#include <doctest.h>

#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "junction/config/config.hpp"
#include "junction/runtime/actor.hpp"
#include "junction/runtime/buffer.hpp"
#include "junction/runtime/learner.hpp"
#include "junction/runtime/param_store.hpp"
#include "junction/runtime/trainer.hpp"

using namespace junction;
using namespace junction::runtime;

namespace {

SegmentPtr synthetic(std::uint64_t version, int horizon = 4, int obs_dim = 3, int valid_steps = -1) {
  auto s = std::make_shared<TrajectorySegment>();
  s->horizon = horizon;
  s->obs_dim = obs_dim;
  s->model_version = version;
  const auto h = static_cast<std::size_t>(horizon);
  s->observations.assign(h * obs_dim, 0.1);
  s->actions.assign(h * 2, 0.0);
  s->pre_tanh.assign(h * 2, 0.0);
  s->log_probs.assign(h, -1.0);
  s->rewards.assign(h, 1.0);
  s->values.assign(h, 0.0);
  s->dones.assign(h, 0);
  s->valid.assign(h, 1);
  if (valid_steps >= 0) {
    for (int t = valid_steps; t < horizon; ++t) {
      s->valid[t] = 0;
      s->dones[t] = 1;
    }
  }
  s->bootstrap_observation.assign(obs_dim, 0.0);
  return s;
}

BufferConfig fifo(int batch, int capacity, double gap = 8.0, int horizon = 4) {
  BufferConfig c;
  c.horizon = horizon;
  c.batch_segments = batch;
  c.capacity = capacity;
  c.max_avg_version_gap = gap;
  return c;
}

void check_identity(const BufferCounters& c) { CHECK(c.produced == c.consumed + c.discarded + c.queued); }

double mean_gap(const std::vector<SegmentPtr>& batch, std::uint64_t version) {
  double sum = 0.0;
  for (const auto& s : batch) sum += static_cast<double>(version - s->model_version);
  return sum / static_cast<double>(batch.size());
}

config::RunConfig small_run() {
  auto cfg = config::parse_config(R"(
[sim]
n_vehicles = 2
max_steps = 40
lidar_rays = 12
[rewards]
front_sector_rays = 2
[network]
hidden = 8,8
[algo]
minibatch_size = 16
epochs = 2
[runtime]
horizon = 8
batch_segments = 4
capacity = 16
budget_updates = 10
deterministic = true
seed = 7
[io]
out_dir =
)");
  return cfg;
}

}  // namespace

TEST_CASE("push to empty buffer holds one segment") {
  SegmentBuffer b(fifo(2, 4));
  CHECK(b.push(synthetic(0)));
  CHECK(b.size() == 1);
  check_identity(b.counters());
}

TEST_CASE("capacity overflow evicts the oldest segment") {
  SegmentBuffer b(fifo(2, 4));
  for (int i = 0; i < 5; ++i) REQUIRE(b.push(synthetic(static_cast<std::uint64_t>(i))));
  CHECK(b.size() == 4);
  CHECK(b.counters().discarded == 1);
  const auto batch = b.try_sample(4);
  REQUIRE(batch);
  CHECK((*batch)[0]->model_version == 1);
  check_identity(b.counters());
}

TEST_CASE("malformed or mismatched segments are rejected") {
  SegmentBuffer b(fifo(2, 4));
  auto bad = std::make_shared<TrajectorySegment>(*synthetic(0));
  bad->rewards.pop_back();
  CHECK_FALSE(b.push(bad));
  auto nan = std::make_shared<TrajectorySegment>(*synthetic(0));
  nan->values[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(b.push(nan));
  CHECK_FALSE(b.push(synthetic(0, 5)));
  CHECK_FALSE(b.push(nullptr));
  const auto c = b.counters();
  CHECK(c.rejected == 4);
  CHECK(c.produced == 0);
  check_identity(c);
}

TEST_CASE("fresh segments are delivered with zero evictions") {
  SegmentBuffer b(fifo(3, 8));
  for (int i = 0; i < 3; ++i) b.push(synthetic(5));
  const auto batch = b.try_sample(5);
  REQUIRE(batch);
  CHECK(batch->size() == 3);
  CHECK(b.counters().discarded == 0);
  CHECK(b.counters().last_batch_gap == 0.0);
}

TEST_CASE("half at gap 16 and half at gap 0 sits on the inclusive boundary") {
  SegmentBuffer b(fifo(4, 8));
  b.push(synthetic(4));
  b.push(synthetic(4));
  b.push(synthetic(20));
  b.push(synthetic(20));
  const auto batch = b.try_sample(20);
  REQUIRE(batch);
  CHECK(batch->size() == 4);
  CHECK(b.counters().discarded == 0);
  CHECK(b.counters().last_batch_gap == 8.0);
}

TEST_CASE("gaps 20, 20, 0 evict the two oldest segments") {
  // Oracle: enumerate the loop by hand. Means over the oldest min(size, 3):
  // (20+20+0)/3 > 8 evict, (20+0)/2 > 8 evict, 0/1 <= 8 stop.
  SegmentBuffer b(fifo(3, 8));
  b.push(synthetic(0));
  b.push(synthetic(0));
  b.push(synthetic(20));
  CHECK_FALSE(b.try_sample(20));
  const auto c = b.counters();
  CHECK(c.discarded == 2);
  CHECK(c.queued == 1);
  check_identity(c);
}

TEST_CASE("adversarial version streams never deliver a batch above the threshold") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int batch = 1 + static_cast<int>(rng() % 8);
    const double gap = static_cast<double>(rng() % 10);
    SegmentBuffer b(fifo(batch, batch * 3, gap));
    std::uint64_t version = 0;
    for (int step = 0; step < 400; ++step) {
      switch (rng() % 3) {
        case 0:
          version += rng() % 6;
          break;
        case 1: {
          const std::uint64_t lag = rng() % 30;
          b.push(synthetic(version > lag ? version - lag : 0));
          break;
        }
        default:
          if (auto got = b.try_sample(version)) {
            REQUIRE(static_cast<int>(got->size()) == batch);
            CHECK(mean_gap(*got, version) <= gap);
          }
      }
      check_identity(b.counters());
    }
    const double f = b.counters().discard_fraction();
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
  }
}

TEST_CASE("sample_batch blocks until enough segments arrive") {
  SegmentBuffer b(fifo(2, 8));
  std::thread producer([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    b.push(synthetic(0));
    b.push(synthetic(0));
  });
  const auto batch = b.sample_batch(0, std::chrono::seconds(10));
  producer.join();
  REQUIRE(batch);
  CHECK(batch->size() == 2);
  CHECK_FALSE(b.sample_batch(0, std::chrono::milliseconds(5)));
  b.close();
  CHECK_FALSE(b.push(synthetic(0)));
}

TEST_CASE("replay ring samples only valid transitions") {
  BufferConfig c = fifo(1, 3);
  c.mode = BufferMode::kReplay;
  SegmentBuffer b(c);
  for (int i = 0; i < 5; ++i) b.push(synthetic(static_cast<std::uint64_t>(i), 4, 3, 2));
  CHECK(b.size() == 3);
  CHECK(b.valid_transitions() == 6);
  check_identity(b.counters());
  std::mt19937_64 rng(3);
  const auto refs = b.sample_transitions(500, rng);
  REQUIRE(refs.size() == 500);
  int seen[2] = {0, 0};
  for (const auto& r : refs) {
    REQUIRE(r.t < 2);
    CHECK(r.segment->valid[r.t] == 1);
    CHECK(r.segment->model_version >= 2);
    ++seen[r.t];
  }
  CHECK(seen[0] > 150);
  CHECK(seen[1] > 150);
}

TEST_CASE("publish stamps consecutive versions and rejects non-finite values") {
  nn::NetworkConfig net;
  net.obs_dim = 4;
  net.hidden = {4};
  ParameterStore store(nn::init_params(net, 1));
  CHECK(store.version() == 0);
  CHECK(store.publish(nn::init_params(net, 2)) == 1);
  CHECK(store.publish(nn::init_params(net, 3)) == 2);
  auto held = store.fetch();
  auto bad = nn::init_params(net, 4);
  bad.values[0] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(store.publish(bad), std::invalid_argument);
  CHECK(store.version() == 2);
  nn::NetworkConfig other = net;
  other.hidden = {5};
  CHECK_THROWS_AS(store.publish(nn::init_params(other, 1)), std::invalid_argument);
  store.publish(nn::init_params(net, 5));
  CHECK(held->version == 2);
  CHECK(store.fetch()->version == 3);
}

TEST_CASE("concurrent publish and fetch only expose complete snapshots") {
  nn::NetworkConfig net;
  net.obs_dim = 4;
  net.hidden = {8};
  auto base = nn::init_params(net, 1);
  ParameterStore store(base);
  // Snapshot k holds the constant k + 1 everywhere so a torn mix is detectable.
  auto constant = [&](float v) {
    auto p = base;
    std::fill(p.values.begin(), p.values.end(), v);
    return p;
  };
  constexpr int kPublishes = 5000;
  std::atomic<bool> done{false};
  std::atomic<long long> fetches{0}, torn{0}, regress{0};
  std::vector<std::thread> readers;
  for (int r = 0; r < 2; ++r) {
    readers.emplace_back([&] {
      std::uint64_t last = 0;
      while (!done.load() || fetches.load() < kPublishes) {
        const auto p = store.fetch();
        const float expect = p->version == 0 ? p->values.front() : static_cast<float>(p->version);
        for (float x : p->values) {
          if (x != expect) {
            ++torn;
            break;
          }
        }
        if (p->version < last) ++regress;
        last = p->version;
        ++fetches;
      }
    });
  }
  std::uint64_t prev = 0;
  for (int k = 1; k <= kPublishes; ++k) {
    const auto v = store.publish(constant(static_cast<float>(k)));
    CHECK(v == prev + 1);
    prev = v;
  }
  done = true;
  for (auto& t : readers) t.join();
  CHECK(fetches.load() + kPublishes >= 10000);
  CHECK(torn.load() == 0);
  CHECK(regress.load() == 0);
  CHECK(store.version() == kPublishes);
}

TEST_CASE("collect emits horizon-length segments stamped with the snapshot version") {
  const auto cfg = small_run();
  Actor actor(env_config(cfg), cfg.network, {0, 8, algos::AlgoKind::kPPO, 0.1, 5});
  auto params = nn::init_params(cfg.network, 1);
  params.version = 5;
  const auto snap = std::make_shared<const nn::ModelParameters>(params);
  for (int round = 0; round < 10; ++round) {
    const auto segs = actor.collect(snap);
    REQUIRE_FALSE(segs.empty());
    for (const auto& s : segs) {
      CHECK(s.model_version == 5);
      CHECK(s.horizon == 8);
      CHECK(s.rewards.size() == 8);
      CHECK(s.observations.size() == 8u * cfg.network.obs_dim);
      CHECK_NOTHROW(s.validate());
      for (int t = 0; t < 8; ++t) {
        if (!s.valid[t]) CHECK(s.dones[t] == 1);
      }
    }
  }
  CHECK(actor.env_steps() == 80);
}

TEST_CASE("collection is byte-identical across runs with the same seeds") {
  const auto cfg = small_run();
  const auto snap = std::make_shared<const nn::ModelParameters>(nn::init_params(cfg.network, 3));
  auto run = [&] {
    Actor actor(env_config(cfg), cfg.network, {0, 8, algos::AlgoKind::kPPO, 0.1, 99});
    std::vector<std::string> out;
    for (int round = 0; round < 8; ++round) {
      for (const auto& s : actor.collect(snap)) out.push_back(encode_segment(s));
    }
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("a budget of 10 updates publishes exactly 10 versions") {
  const auto cfg = small_run();
  int hooks = 0;
  TrainHooks h;
  h.on_update = [&](const algos::UpdateStats& u, const RunStats& s) {
    ++hooks;
    CHECK(u.version == s.version);
  };
  const auto r = run_training(cfg, h);
  CHECK(hooks == 10);
  CHECK(r.stats.updates == 10);
  CHECK(r.stats.version == 10);
  CHECK(r.final_params.version == 10);
  CHECK(r.stats.produced == r.stats.consumed + r.stats.discarded + r.stats.queued);
}

TEST_CASE("deterministic mode reproduces the update statistics stream") {
  const auto cfg = small_run();
  const auto a = run_training(cfg);
  const auto b = run_training(cfg);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].policy_loss == b.history[i].policy_loss);
    CHECK(a.history[i].value_loss == b.history[i].value_loss);
    CHECK(a.history[i].entropy == b.history[i].entropy);
    CHECK(a.history[i].grad_norm == b.history[i].grad_norm);
  }
  CHECK(a.final_params.values == b.final_params.values);
}

TEST_CASE("threaded training honours the budget and the accounting identity") {
  auto cfg = small_run();
  cfg.runtime.deterministic = false;
  cfg.runtime.actors = 2;
  cfg.runtime.budget_updates = 5;
  const auto r = run_training(cfg);
  CHECK(r.stats.updates == 5);
  CHECK(r.stats.version == 5);
  CHECK(r.stats.produced == r.stats.consumed + r.stats.discarded + r.stats.queued);
  CHECK(r.stats.last_batch_gap <= cfg.runtime.max_avg_version_gap);
}

TEST_CASE("off-policy learners train from the replay ring") {
  for (const char* name : {"sac", "ddpg"}) {
    auto cfg = small_run();
    config::set_key(cfg, "algo.name", name);
    cfg.runtime.warmup_transitions = 32;
    cfg.runtime.budget_updates = 6;
    cfg.hyper.replay_batch_size = 16;
    cfg.hyper.critic_hidden = {8, 8};
    const auto r = run_training(cfg);
    CHECK(r.stats.updates == 6);
    CHECK(r.stats.version == 6);
    for (float x : r.final_params.values) REQUIRE(std::isfinite(x));
  }
}

TEST_CASE("learner batches normalize advantages over valid steps") {
  const auto cfg = small_run();
  std::vector<SegmentPtr> batch;
  for (int i = 0; i < 3; ++i) {
    auto s = std::make_shared<TrajectorySegment>(*synthetic(0, 6, cfg.network.obs_dim, 4));
    for (int t = 0; t < 6; ++t) s->rewards[t] = s->valid[t] ? t + i : 0.0;
    batch.push_back(s);
  }
  const auto b = build_ppo_batch(batch, cfg.network, cfg.hyper);
  REQUIRE(b.advantages.size() == 12);
  double mean = 0.0, sq = 0.0;
  for (double a : b.advantages) mean += a;
  mean /= 12.0;
  for (double a : b.advantages) sq += (a - mean) * (a - mean);
  CHECK(std::abs(mean) < 1e-9);
  CHECK(std::sqrt(sq / 12.0) == doctest::Approx(1.0).epsilon(1e-3));
}
