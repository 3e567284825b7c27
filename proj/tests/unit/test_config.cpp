#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "junction/config/config.hpp"
#include "junction/config/render.hpp"
#include "junction/nn/checkpoint.hpp"

using namespace junction;
using namespace junction::config;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("junction_test_config_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(JUNCTION_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

metrics::TrajectoryLog straight_log(int steps) {
  metrics::TrajectoryLog log;
  log.header.n_vehicles = 2;
  log.header.max_steps = 100;
  log.episode_steps = steps;
  log.complete = true;
  for (int s = 1; s <= steps; ++s) {
    metrics::AgentRecord a;
    a.step = s;
    a.agent = 0;
    a.x = -40.0 + s;
    a.y = -1.75;
    a.has_lidar = true;
    a.lidar_mean = 0.5;
    a.front_min = 0.5;
    metrics::AgentRecord b = a;
    b.agent = 1;
    b.x = 30.0;
    b.y = 1.75;
    b.heading = 3.14159265358979;
    b.in_contact = true;
    log.records.push_back(a);
    log.records.push_back(b);
  }
  return log;
}

}  // namespace

TEST_CASE("empty config yields the documented defaults") {
  const RunConfig cfg = parse_config("");
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.sim.n_vehicles == 40);
  CHECK(cfg.runtime.max_avg_version_gap == 8.0);
  CHECK(cfg.eval.episodes == 100);
  CHECK(cfg.algo == algos::AlgoKind::kPPO);
  CHECK(cfg.network.obs_dim == 11 + cfg.sim.lidar.rays);
  const std::string canon = cfg.canonical();
  for (const auto& [key, value] : documented_defaults()) {
    INFO(key);
    CHECK(canon.find(key + " = " + value + "\n") != std::string::npos);
  }
}

TEST_CASE("errors name the offending key") {
  const auto algo = error_of("[algo]\nname = qlearn\n");
  CHECK(algo.rfind("algo.name", 0) == 0);
  CHECK(algo.find("ppo") != std::string::npos);
  CHECK(algo.find("ddpg") != std::string::npos);
  CHECK(error_of("[sim]\nbogus = 1\n").rfind("sim.bogus", 0) == 0);
  CHECK(error_of("[sim]\nn_vehicles = many\n").rfind("sim.n_vehicles", 0) == 0);
  CHECK(error_of("[runtime]\nmax_avg_version_gap = -1\n").rfind("runtime.max_avg_version_gap", 0) == 0);
  CHECK(error_of("[runtime]\ncapacity = 8\nbatch_segments = 16\n").find("runtime.") == 0);
  CHECK(error_of("[algo]\nname = sac\n[network]\nmode = ctce\n").rfind("algo.name", 0) == 0);
}

TEST_CASE("hash is stable under key reordering and sensitive to values") {
  const std::string a = "[sim]\nn_vehicles = 4\nmax_steps = 300\n[algo]\nentropy_coef = 0.02\n";
  const std::string b = "# same keys\n[algo]\nentropy_coef = 0.02\n\n[sim]\nmax_steps = 300\nn_vehicles = 4\n";
  CHECK(parse_config(a).hash() == parse_config(b).hash());
  CHECK(parse_config(a).hash() != parse_config("[sim]\nn_vehicles = 5\n").hash());
  CHECK(hash_hex(0x1234).size() == 16);
}

TEST_CASE("files and environment overrides layer on top of defaults") {
  const fs::path dir = scratch("files");
  std::ofstream(dir / "run.ini") << "[sim]\n# four cars\nn_vehicles = 4\n[rewards]\nsafe_distance = true\n";
  ::setenv("JUNCTION_SIM__N_VEHICLES", "6", 1);
  ::setenv("JUNCTION_ALGO__LEARNING_RATE", "0.001", 1);
  const auto env = environment_overrides();
  ::unsetenv("JUNCTION_SIM__N_VEHICLES");
  ::unsetenv("JUNCTION_ALGO__LEARNING_RATE");
  CHECK(env.at("sim.n_vehicles") == "6");
  CHECK(env.at("algo.learning_rate") == "0.001");
  CHECK(load_config(dir / "run.ini").sim.n_vehicles == 4);
  const RunConfig cfg = load_config(dir / "run.ini", env);
  CHECK(cfg.sim.n_vehicles == 6);
  CHECK(cfg.hyper.learning_rate == 0.001);
  CHECK(cfg.rewards.safe_distance_enabled);
  CHECK_THROWS_AS(load_config(dir / "missing.ini"), std::invalid_argument);
}

TEST_CASE("set_key validates like the parser") {
  RunConfig cfg = parse_config("");
  set_key(cfg, "runtime.actors", "8");
  CHECK(cfg.runtime.actors == 8);
  set_key(cfg, "sim.lidar_rays", "36");
  CHECK(cfg.network.obs_dim == 47);
  CHECK_THROWS_AS(set_key(cfg, "runtime.nope", "1"), std::invalid_argument);
}

TEST_CASE("checkpoints round trip and detect corruption") {
  const fs::path dir = scratch("ckpt");
  nn::NetworkConfig net;
  net.obs_dim = 6;
  net.hidden = {5, 4};
  nn::Checkpoint c;
  c.params = nn::init_params(net, 9);
  c.params.version = 42;
  c.mode = nn::Mode::kCTCE;
  c.config_hash = 77;
  nn::save_checkpoint(dir / "a.ckpt", c);
  const auto back = nn::load_checkpoint(dir / "a.ckpt");
  CHECK(back.params.values == c.params.values);
  CHECK(back.params.version == 42);
  CHECK(back.mode == nn::Mode::kCTCE);
  CHECK(back.config_hash == 77);
  fs::resize_file(dir / "a.ckpt", fs::file_size(dir / "a.ckpt") - 3);
  CHECK_THROWS(nn::load_checkpoint(dir / "a.ckpt"));
}

TEST_CASE("a ten-step log renders ten frames") {
  const fs::path dir = scratch("frames");
  CHECK(render_frames(straight_log(10), dir) == 10);
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir)) files += e.path().extension() == ".ppm";
  CHECK(files == 10);
  const Image first = read_ppm(dir / "frame_00001.ppm");
  const Image again = render_frame(straight_log(10), 1);
  CHECK(first.width == again.width);
  CHECK(first.rgb == again.rgb);
}

TEST_CASE("an empty log renders zero frames") {
  const fs::path dir = scratch("empty");
  CHECK(render_frames(straight_log(0), dir) == 0);
  CHECK(fs::is_empty(dir));
}

TEST_CASE("vehicles are painted in the palette colors") {
  const auto log = straight_log(3);
  const RenderOptions opt;
  const Image img = render_frame(log, 2, opt);
  // Sample behind each center, clear of the forward overlay lines.
  const auto [cx, cy] = to_pixel(log.header, opt, 31.5, 1.75);
  CHECK(img.at(cx, cy) == palette::kContact);
  const auto [nx, ny] = to_pixel(log.header, opt, -39.5, -1.75);
  CHECK(img.at(nx, ny) == palette::kNormal);
  const auto [zx, zy] = to_pixel(log.header, opt, 6.9, 0.0);
  CHECK(img.at(zx, zy) == palette::kConflictZone);
}

TEST_CASE("an unwritable directory is reported") {
  const fs::path dir = scratch("blocked");
  std::ofstream(dir / "file") << "x";
  CHECK_THROWS_AS(render_frames(straight_log(2), dir / "file" / "sub"), std::runtime_error);
}

TEST_CASE("cli exit codes: 0 success, 1 validation, 2 runtime failure") {
  const fs::path dir = scratch("cli");
  std::ofstream(dir / "bad.ini") << "[algo]\nname = qlearn\n";
  std::ofstream(dir / "ok.ini") << "[sim]\nn_vehicles = 2\n";
  std::ofstream(dir / "garbage.ckpt") << "not a checkpoint";
  CHECK(run_cli("inspect config " + (dir / "ok.ini").string()) == 0);
  CHECK(run_cli("inspect config " + (dir / "bad.ini").string()) == 1);
  CHECK(run_cli("train --actors zero") == 1);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("inspect checkpoint " + (dir / "garbage.ckpt").string()) == 2);
  CHECK(run_cli("evaluate --checkpoint " + (dir / "missing.ckpt").string()) == 2);
}

TEST_CASE("shipped configs validate") {
  int n = 0;
  for (const auto& e : fs::directory_iterator(fs::path(JUNCTION_SOURCE_DIR) / "configs")) {
    if (e.path().extension() != ".ini") continue;
    INFO(e.path().string());
    CHECK_NOTHROW(load_config(e.path()).validate());
    ++n;
  }
  CHECK(n >= 2);
}
