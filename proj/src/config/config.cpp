#include "junction/config/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "junction/nn/checkpoint.hpp"

extern char** environ;

namespace junction::config {

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw std::invalid_argument(key + ": " + what);
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

long long to_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || end != t.data() + t.size()) fail(key, "expected an integer, got '" + text + "'");
  return v;
}

int to_int32(const std::string& key, const std::string& text) {
  const long long v = to_int(key, text);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) fail(key, "integer out of range");
  return static_cast<int>(v);
}

std::uint64_t to_u64(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || end != t.data() + t.size()) {
    fail(key, "expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) fail(key, "expected a number, got '" + text + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  fail(key, "expected true or false, got '" + text + "'");
}

std::vector<int> to_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_int32(key, item));
  if (out.empty()) fail(key, "expected a comma-separated list of integers");
  return out;
}

std::string fmt(double v) {
  std::ostringstream o;
  o << std::setprecision(17) << v;
  return o.str();
}

std::string fmt(bool v) { return v ? "true" : "false"; }

std::string fmt(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define JN_INT(NAME, FIELD)                                                                        \
  Key {                                                                                            \
    NAME, [](RunConfig& c, const std::string& v) { c.FIELD = to_int32(NAME, v); },                 \
        [](const RunConfig& c) { return std::to_string(c.FIELD); }                                 \
  }
#define JN_I64(NAME, FIELD)                                                                        \
  Key {                                                                                            \
    NAME, [](RunConfig& c, const std::string& v) { c.FIELD = to_int(NAME, v); },                   \
        [](const RunConfig& c) { return std::to_string(c.FIELD); }                                 \
  }
#define JN_U64(NAME, FIELD)                                                                        \
  Key {                                                                                            \
    NAME, [](RunConfig& c, const std::string& v) { c.FIELD = to_u64(NAME, v); },                   \
        [](const RunConfig& c) { return std::to_string(c.FIELD); }                                 \
  }
#define JN_DBL(NAME, FIELD)                                                                        \
  Key {                                                                                            \
    NAME, [](RunConfig& c, const std::string& v) { c.FIELD = to_double(NAME, v); },                \
        [](const RunConfig& c) { return fmt(c.FIELD); }                                            \
  }
#define JN_BOOL(NAME, FIELD)                                                                       \
  Key {                                                                                            \
    NAME, [](RunConfig& c, const std::string& v) { c.FIELD = to_bool(NAME, v); },                  \
        [](const RunConfig& c) { return fmt(c.FIELD); }                                            \
  }
#define JN_LIST(NAME, FIELD)                                                                       \
  Key {                                                                                            \
    NAME, [](RunConfig& c, const std::string& v) { c.FIELD = to_int_list(NAME, v); },              \
        [](const RunConfig& c) { return fmt(c.FIELD); }                                            \
  }

const std::vector<Key>& registry() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k = {
        JN_INT("sim.n_vehicles", sim.n_vehicles),
        JN_DBL("sim.dt", sim.dt),
        JN_INT("sim.max_steps", sim.max_steps),
        JN_DBL("sim.arm_length", sim.map.arm_length),
        JN_DBL("sim.lane_width", sim.map.lane_width),
        JN_INT("sim.lanes_per_arm", sim.map.lanes_per_arm),
        JN_DBL("sim.corner_radius", sim.map.corner_radius),
        JN_DBL("sim.min_turn_radius", sim.map.min_turn_radius),
        JN_DBL("sim.spawn_headway", sim.spawn_headway),
        JN_DBL("sim.first_slot_gap", sim.first_slot_gap),
        JN_DBL("sim.arrival_radius", sim.arrival_radius),
        JN_DBL("sim.checkpoint_spacing", sim.checkpoint_spacing),
        JN_DBL("sim.nav_scale", sim.nav_scale),
        JN_INT("sim.lidar_rays", sim.lidar.rays),
        JN_DBL("sim.lidar_range", sim.lidar.range),
        JN_DBL("sim.wheelbase", sim.vehicle.wheelbase),
        JN_DBL("sim.max_steer", sim.vehicle.max_steer),
        JN_DBL("sim.max_accel", sim.vehicle.max_accel),
        JN_DBL("sim.max_brake", sim.vehicle.max_brake),
        JN_DBL("sim.max_speed", sim.vehicle.max_speed),
        JN_DBL("sim.max_reverse_speed", sim.vehicle.max_reverse_speed),
        JN_DBL("sim.vehicle_length", sim.vehicle.length),
        JN_DBL("sim.vehicle_width", sim.vehicle.width),

        JN_DBL("rewards.c_progress", rewards.c_progress),
        JN_DBL("rewards.c_speed", rewards.c_speed),
        JN_DBL("rewards.arrival_bonus", rewards.arrival_bonus),
        JN_DBL("rewards.crash_penalty", rewards.crash_penalty),
        JN_DBL("rewards.out_of_road_penalty", rewards.out_of_road_penalty),
        JN_BOOL("rewards.safe_distance", rewards.safe_distance_enabled),
        JN_BOOL("rewards.right_of_way", rewards.right_of_way_enabled),
        JN_DBL("rewards.safe_distance_threshold", rewards.safe_distance_threshold),
        JN_INT("rewards.front_sector_rays", rewards.front_sector_rays),

        JN_LIST("network.hidden", network.hidden),
        JN_DBL("network.pooling_radius", network.pooling_radius),

        JN_DBL("algo.gamma", hyper.gamma),
        JN_DBL("algo.lambda", hyper.lambda),
        JN_DBL("algo.clip_epsilon", hyper.clip_epsilon),
        JN_DBL("algo.learning_rate", hyper.learning_rate),
        JN_DBL("algo.entropy_coef", hyper.entropy_coef),
        JN_DBL("algo.value_coef", hyper.value_coef),
        JN_INT("algo.epochs", hyper.epochs),
        JN_INT("algo.minibatch_size", hyper.minibatch_size),
        JN_DBL("algo.max_grad_norm", hyper.max_grad_norm),
        JN_BOOL("algo.reward_scaling", hyper.reward_scaling),
        JN_DBL("algo.tau", hyper.tau),
        JN_DBL("algo.sac_alpha", hyper.sac_alpha),
        JN_DBL("algo.ddpg_noise", hyper.ddpg_noise),
        JN_INT("algo.replay_batch_size", hyper.replay_batch_size),
        JN_LIST("algo.critic_hidden", hyper.critic_hidden),

        JN_INT("runtime.actors", runtime.actors),
        JN_INT("runtime.horizon", runtime.horizon),
        JN_INT("runtime.batch_segments", runtime.batch_segments),
        JN_INT("runtime.capacity", runtime.capacity),
        JN_DBL("runtime.max_avg_version_gap", runtime.max_avg_version_gap),
        JN_I64("runtime.budget_updates", runtime.budget_updates),
        JN_DBL("runtime.budget_seconds", runtime.budget_seconds),
        JN_BOOL("runtime.deterministic", runtime.deterministic),
        JN_U64("runtime.seed", runtime.seed),
        JN_INT("runtime.warmup_transitions", runtime.warmup_transitions),
        JN_INT("runtime.updates_per_round", runtime.updates_per_round),

        JN_INT("eval.episodes", eval.episodes),
        JN_U64("eval.seed", eval.seed),
        JN_INT("eval.periodic_episodes", eval.periodic_episodes),

        JN_INT("io.checkpoint_every", io.checkpoint_every),
        JN_INT("io.stats_every", io.stats_every),
        JN_INT("io.eval_every", io.eval_every),
        JN_BOOL("io.save_logs", io.save_logs),
    };
    k.push_back({"network.mode",
                 [](RunConfig& c, const std::string& v) { c.network.mode = nn::parse_mode(trim(v).c_str()); },
                 [](const RunConfig& c) { return std::string(nn::mode_name(c.network.mode)); }});
    k.push_back({"algo.name", [](RunConfig& c, const std::string& v) { c.algo = algos::parse_algo(trim(v).c_str()); },
                 [](const RunConfig& c) { return std::string(algos::algo_name(c.algo)); }});
    k.push_back({"io.out_dir", [](RunConfig& c, const std::string& v) { c.io.out_dir = trim(v); },
                 [](const RunConfig& c) { return c.io.out_dir; }});
    std::sort(k.begin(), k.end(), [](const Key& a, const Key& b) { return a.name < b.name; });
    return k;
  }();
  return keys;
}

#undef JN_INT
#undef JN_I64
#undef JN_U64
#undef JN_DBL
#undef JN_BOOL
#undef JN_LIST

const Key* find_key(const std::string& name) {
  const auto& keys = registry();
  auto it = std::lower_bound(keys.begin(), keys.end(), name, [](const Key& k, const std::string& n) { return k.name < n; });
  return it != keys.end() && it->name == name ? &*it : nullptr;
}

void sync_derived(RunConfig& c) { c.network.obs_dim = 6 + 5 + c.sim.lidar.rays; }

}  // namespace

void set_key(RunConfig& config, const std::string& key, const std::string& value) {
  const Key* k = find_key(key);
  if (!k) fail(key, "unknown key");
  k->set(config, value);
  sync_derived(config);
}

void RunConfig::validate() const {
  sim.validate();
  rewards.validate();
  network.validate();
  hyper.validate();
  if (network.obs_dim != 11 + sim.lidar.rays) fail("network.obs_dim", "must equal 11 + sim.lidar_rays");
  if (rewards.front_sector_rays > sim.lidar.rays) fail("rewards.front_sector_rays", "exceeds sim.lidar_rays");
  if (algo != algos::AlgoKind::kPPO && network.mode != nn::Mode::kCTDE) {
    fail("algo.name", std::string(algos::algo_name(algo)) + " requires network.mode = ctde");
  }
  const RuntimeConfig& r = runtime;
  if (r.actors < 1) fail("runtime.actors", "must be >= 1");
  if (r.horizon < 1) fail("runtime.horizon", "must be >= 1");
  if (r.batch_segments < 1) fail("runtime.batch_segments", "must be >= 1");
  if (r.capacity < r.batch_segments) fail("runtime.capacity", "must be >= runtime.batch_segments");
  if (!(r.max_avg_version_gap >= 0.0)) fail("runtime.max_avg_version_gap", "must be >= 0");
  if (r.budget_updates < 0) fail("runtime.budget_updates", "must be >= 0");
  if (!(r.budget_seconds >= 0.0)) fail("runtime.budget_seconds", "must be >= 0");
  if (r.budget_updates == 0 && r.budget_seconds == 0.0) {
    fail("runtime.budget_updates", "a run needs an update or time budget");
  }
  if (r.warmup_transitions < 0) fail("runtime.warmup_transitions", "must be >= 0");
  if (r.updates_per_round < 1) fail("runtime.updates_per_round", "must be >= 1");
  if (eval.episodes < 1) fail("eval.episodes", "must be >= 1");
  if (eval.periodic_episodes < 1) fail("eval.periodic_episodes", "must be >= 1");
  if (io.checkpoint_every < 0) fail("io.checkpoint_every", "must be >= 0");
  if (io.stats_every < 1) fail("io.stats_every", "must be >= 1");
  if (io.eval_every < 0) fail("io.eval_every", "must be >= 0");
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const Key& k : registry()) out += k.name + " = " + k.get(*this) + "\n";
  return out;
}

std::uint64_t RunConfig::hash() const {
  const std::string c = canonical();
  return nn::fnv1a64(c.data(), c.size());
}

std::vector<std::pair<std::string, std::string>> documented_defaults() {
  RunConfig c;
  sync_derived(c);
  std::vector<std::pair<std::string, std::string>> out;
  for (const Key& k : registry()) out.emplace_back(k.name, k.get(c));
  return out;
}

std::map<std::string, std::string> environment_overrides() {
  static const std::string prefix = "JUNCTION_";
  std::map<std::string, std::string> out;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry(*e);
    if (entry.rfind(prefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    const std::string name = entry.substr(prefix.size(), eq - prefix.size());
    const auto sep = name.find("__");
    if (sep == std::string::npos) continue;
    out[lower(name.substr(0, sep)) + "." + lower(name.substr(sep + 2))] = entry.substr(eq + 1);
  }
  return out;
}

RunConfig parse_config(const std::string& text, const std::map<std::string, std::string>& overrides) {
  // '#' comment lines are accepted alongside the parser's native ';'.
  std::string cleaned;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    const std::string t = trim(line);
    cleaned += (!t.empty() && t[0] == '#') ? std::string() : line;
    cleaned += '\n';
  }
  boost::property_tree::ptree tree;
  std::istringstream in(cleaned);
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::invalid_argument("config: line " + std::to_string(e.line()) + ": " + e.message());
  }

  RunConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) fail(section, "key outside a section");
    for (const auto& [key, value] : body) set_key(c, section + "." + key, value.data());
  }
  for (const auto& [key, value] : overrides) set_key(c, key, value);
  sync_derived(c);
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const std::map<std::string, std::string>& overrides) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("config: cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string hash_hex(std::uint64_t hash) {
  std::ostringstream o;
  o << std::hex << std::setw(16) << std::setfill('0') << hash;
  return o.str();
}

}  // namespace junction::config
