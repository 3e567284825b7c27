#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "junction/nn/checkpoint.hpp"
#include "junction/nn/policy.hpp"

using namespace junction::nn;

namespace {

NetworkConfig small(Mode mode, std::vector<int> hidden) {
  NetworkConfig c;
  c.mode = mode;
  c.hidden = std::move(hidden);
  c.obs_dim = 5;
  return c;
}

Matrix random_obs(int dim, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix x(dim, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < dim; ++i) x(i, j) = g(rng);
  return x;
}

struct LossSpec {
  std::vector<ActionVec> actions;
  std::vector<double> weights;
  std::vector<double> targets;
};

// Scalar loss sum_i w_i * log pi(a_i) + 0.5 (v_i - t_i)^2, evaluated on a fresh forward.
double loss_value(const PolicyNetwork& net, const Matrix& obs, const LossSpec& s,
                  std::shared_ptr<const PoolingMatrix> pool = nullptr) {
  const auto b = net.forward_batch(obs, pool);
  double l = 0.0;
  for (Eigen::Index i = 0; i < obs.cols(); ++i) {
    const ActionVec m{b.mean(0, i), b.mean(1, i)};
    const ActionVec ls{b.log_std[0], b.log_std[1]};
    l += s.weights[i] * log_prob(m, ls, s.actions[i]);
    l += 0.5 * (b.value[i] - s.targets[i]) * (b.value[i] - s.targets[i]);
  }
  return l;
}

std::vector<double> loss_grad(const PolicyNetwork& net, const Matrix& obs, const LossSpec& s,
                              std::shared_ptr<const PoolingMatrix> pool = nullptr) {
  const auto b = net.forward_batch(obs, pool);
  Matrix dm(2, obs.cols());
  Eigen::VectorXd dls = Eigen::VectorXd::Zero(2);
  Eigen::RowVectorXd dv(obs.cols());
  for (Eigen::Index i = 0; i < obs.cols(); ++i) {
    const auto g = log_prob_grad({b.mean(0, i), b.mean(1, i)}, {b.log_std[0], b.log_std[1]}, s.actions[i]);
    dm(0, i) = s.weights[i] * g.d_mean[0];
    dm(1, i) = s.weights[i] * g.d_mean[1];
    dls[0] += s.weights[i] * g.d_log_std[0];
    dls[1] += s.weights[i] * g.d_log_std[1];
    dv[i] = b.value[i] - s.targets[i];
  }
  return net.backward(b, dm, dls, dv);
}

double max_relative_fd_error(PolicyNetwork& net, const Matrix& obs, const LossSpec& s,
                             std::shared_ptr<const PoolingMatrix> pool = nullptr) {
  const auto analytic = loss_grad(net, obs, s, pool);
  const double h = 1e-4;
  double worst = 0.0;
  auto theta = net.mutable_params();
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double keep = theta[k];
    theta[k] = keep + h;
    const double up = loss_value(net, obs, s, pool);
    theta[k] = keep - h;
    const double down = loss_value(net, obs, s, pool);
    theta[k] = keep;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(numeric), std::abs(analytic[k]), 1e-3});
    worst = std::max(worst, std::abs(numeric - analytic[k]) / denom);
  }
  return worst;
}

LossSpec random_loss(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  LossSpec s;
  for (int i = 0; i < n; ++i) {
    s.actions.push_back({u(rng), u(rng)});
    s.weights.push_back(u(rng));
    s.targets.push_back(u(rng));
  }
  return s;
}

}  // namespace

TEST_CASE("parameter layout and init") {
  NetworkConfig c;
  const auto p = init_params(c, 7);
  const std::size_t expect = (83 * 256 + 256) + (256 * 256 + 256) + (256 * 2 + 2) + 2 + (256 * 1 + 1);
  CHECK(p.values.size() == expect);
  CHECK(p.version == 0);
  CHECK_NOTHROW(p.check());
  CHECK(p.values == init_params(c, 7).values);
  CHECK(p.values != init_params(c, 8).values);

  for (const auto& d : p.layout) {
    const float* v = p.values.data() + d.offset;
    if (d.role == LayerRole::kLogStd) {
      CHECK(v[0] == -0.5f);
      CHECK(v[1] == -0.5f);
      continue;
    }
    const double bound = std::sqrt(1.0 / d.in) * (d.role == LayerRole::kMeanHead ? 0.01 : 1.0);
    for (std::size_t k = 0; k < d.size(); ++k) CHECK(std::abs(v[k]) <= bound * (1 + 1e-6));
  }

  NetworkConfig ctce = c;
  ctce.mode = Mode::kCTCE;
  const auto q = init_params(ctce, 1);
  CHECK(q.layout[1].in == 512);
  ctce.pooled_width = 128;
  CHECK_THROWS(ctce.validate());
  NetworkConfig empty = c;
  empty.hidden.clear();
  CHECK_THROWS(empty.validate());
}

TEST_CASE("zero weights give zero mean and value") {
  PolicyNetwork net(small(Mode::kCTDE, {8, 8}));
  std::vector<double> obs(5, 0.0);
  const auto out = net.forward(obs);
  CHECK(out.mean[0] == 0.0);
  CHECK(out.mean[1] == 0.0);
  CHECK(out.value == 0.0);

  net.set_params(init_params(net.config(), 3));
  std::vector<double> x{0.1, -0.4, 2.0, 0.0, 1.0};
  const auto a = net.forward(x), b = net.forward(x);
  CHECK(a.mean == b.mean);
  CHECK(a.value == b.value);
  CHECK_THROWS(net.forward(std::vector<double>(4, 0.0)));
  CHECK_THROWS(net.forward_ctce({x}));
}

TEST_CASE("analytic gradients match central differences") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    std::mt19937_64 rng(seed);
    for (Mode mode : {Mode::kCTDE, Mode::kCTCE}) {
      for (const auto& hidden : std::vector<std::vector<int>>{{8}, {8, 6}}) {
        PolicyNetwork net(small(mode, hidden));
        auto p = init_params(net.config(), seed);
        // Larger head weights so the check exercises every block.
        net.set_params(p);
        for (double& v : net.mutable_params()) v *= 3.0;
        net.mutable_params()[net.num_params() - 3 - 8] = -0.3;
        const Matrix obs = random_obs(5, 4, rng);
        const LossSpec s = random_loss(4, rng);
        const double err = max_relative_fd_error(net, obs, s);
        INFO("seed " << seed << " mode " << mode_name(mode) << " depth " << hidden.size());
        CHECK(err < 1e-4);
      }
    }
  }
}

TEST_CASE("gradients through an explicit pooling matrix") {
  std::mt19937_64 rng(31);
  const auto cfg = small(Mode::kCTCE, {8, 6});
  PolicyNetwork net(cfg, init_params(cfg, 31));
  for (double& v : net.mutable_params()) v *= 3.0;
  const Matrix obs = random_obs(5, 5, rng);
  const LossSpec s = random_loss(5, rng);
  auto pool = std::make_shared<PoolingMatrix>(
      pooling_by_radius({{0, 0}, {1, 0}, {2.5, 0}, {9, 0}, {10, 0}}, 1.6));
  CHECK(max_relative_fd_error(net, obs, s, pool) < 1e-4);
}

TEST_CASE("gradient linearity and zero upstream") {
  std::mt19937_64 rng(5);
  PolicyNetwork net(small(Mode::kCTDE, {8}), init_params(small(Mode::kCTDE, {8}), 5));
  const Matrix obs = random_obs(5, 2, rng);
  const LossSpec s = random_loss(2, rng);
  const auto both = loss_grad(net, obs, s);
  LossSpec s0{{s.actions[0]}, {s.weights[0]}, {s.targets[0]}};
  LossSpec s1{{s.actions[1]}, {s.weights[1]}, {s.targets[1]}};
  const auto g0 = loss_grad(net, obs.col(0), s0);
  const auto g1 = loss_grad(net, obs.col(1), s1);
  for (std::size_t k = 0; k < both.size(); ++k) CHECK(both[k] == doctest::Approx(g0[k] + g1[k]).epsilon(1e-12));

  const auto b = net.forward_batch(obs);
  const auto zero = net.backward(b, Matrix::Zero(2, 2), Eigen::VectorXd::Zero(2), Eigen::RowVectorXd::Zero(2));
  CHECK(std::all_of(zero.begin(), zero.end(), [](double v) { return v == 0.0; }));
  CHECK_THROWS(net.backward(b, Matrix::Zero(2, 3), Eigen::VectorXd::Zero(2), Eigen::RowVectorXd::Zero(2)));
}

TEST_CASE("CTDE outputs depend only on the agent's own observation") {
  std::mt19937_64 rng(9);
  const auto cfg = small(Mode::kCTDE, {8, 8});
  PolicyNetwork net(cfg, init_params(cfg, 9));
  Matrix obs = random_obs(5, 3, rng);
  const auto before = net.forward_batch(obs);
  obs.col(1) = random_obs(5, 1, rng);
  obs.col(2).setZero();
  const auto after = net.forward_batch(obs);
  CHECK(before.mean.col(0) == after.mean.col(0));
  CHECK(before.value[0] == after.value[0]);
}

TEST_CASE("CTCE pooling is permutation equivariant") {
  std::mt19937_64 rng(11);
  const auto cfg = small(Mode::kCTCE, {8, 6});
  PolicyNetwork net(cfg, init_params(cfg, 11));
  for (double& v : net.mutable_params()) v *= 2.0;

  std::vector<std::vector<double>> obs;
  for (int i = 0; i < 5; ++i) {
    const Matrix c = random_obs(5, 1, rng);
    obs.emplace_back(c.data(), c.data() + 5);
  }
  const auto out = net.forward_ctce(obs);
  std::vector<int> perm(5);
  std::iota(perm.begin(), perm.end(), 0);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<double>> shuffled;
    for (int k : perm) shuffled.push_back(obs[k]);
    const auto pout = net.forward_ctce(shuffled);
    for (int i = 0; i < 5; ++i) {
      CHECK(std::abs(pout[i].mean[0] - out[perm[i]].mean[0]) < 1e-6);
      CHECK(std::abs(pout[i].mean[1] - out[perm[i]].mean[1]) < 1e-6);
      CHECK(std::abs(pout[i].value - out[perm[i]].value) < 1e-6);
    }
  }

  // Changing one agent moves every other agent's output through the pool.
  auto changed = obs;
  changed[4][0] += 1.0;
  CHECK(net.forward_ctce(changed)[0].mean != out[0].mean);

  const auto twins = net.forward_ctce({obs[0], obs[0]});
  CHECK(twins[0].mean == twins[1].mean);
  CHECK(twins[0].value == twins[1].value);
  CHECK_THROWS(net.forward_ctce({}));
}

TEST_CASE("single-agent CTCE equals a CTDE net fed the duplicated hidden vector") {
  const auto cfg = small(Mode::kCTCE, {8, 6});
  PolicyNetwork ctce(cfg, init_params(cfg, 4));
  NetworkConfig tail;
  tail.obs_dim = 16;
  tail.hidden = {6};
  PolicyNetwork ctde(tail);
  const std::size_t first = 5 * 8 + 8;
  ctde.set_params(ctce.params().subspan(first));

  const std::vector<double> obs{0.3, -1.0, 0.5, 0.0, 2.0};
  const auto a = ctce.forward_ctce({obs})[0];
  std::vector<double> hh = a.hidden;
  hh.insert(hh.end(), a.hidden.begin(), a.hidden.end());
  const auto b = ctde.forward(hh);
  CHECK(a.mean[0] == doctest::Approx(b.mean[0]).epsilon(1e-12));
  CHECK(a.mean[1] == doctest::Approx(b.mean[1]).epsilon(1e-12));
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
}

TEST_CASE("group and radius pooling") {
  std::mt19937_64 rng(13);
  const auto cfg = small(Mode::kCTCE, {8});
  PolicyNetwork net(cfg, init_params(cfg, 13));
  const Matrix obs = random_obs(5, 5, rng);
  auto pool = std::make_shared<PoolingMatrix>(pooling_by_group({0, 1, 0, 1, 1}));
  const auto joint = net.forward_batch(obs, pool);
  Matrix g0(5, 2), g1(5, 3);
  g0 << obs.col(0), obs.col(2);
  g1 << obs.col(1), obs.col(3), obs.col(4);
  const auto a = net.forward_batch(g0), b = net.forward_batch(g1);
  CHECK((joint.mean.col(2) - a.mean.col(1)).norm() < 1e-12);
  CHECK((joint.mean.col(3) - b.mean.col(1)).norm() < 1e-12);

  auto wide = std::make_shared<PoolingMatrix>(
      pooling_by_radius({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}}, 100.0));
  CHECK((net.forward_batch(obs, wide).mean - net.forward_batch(obs).mean).norm() < 1e-12);
  const PoolingMatrix tight = pooling_by_radius({{0, 0}, {1, 0}, {50, 0}}, 2.0);
  CHECK(tight.coeff(0, 1) == doctest::Approx(0.5));
  CHECK(tight.coeff(2, 2) == 1.0);
  CHECK(tight.coeff(2, 0) == 0.0);
}

TEST_CASE("squashed Gaussian sampling and density") {
  std::mt19937_64 rng(17);
  const ActionVec mean{0.0, 0.0}, log_std{0.3, -0.2};
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto s = sample_action(mean, log_std, rng);
    CHECK_MESSAGE((std::abs(s.action[0]) < 1.0 && std::abs(s.action[1]) < 1.0), "action left (-1, 1)");
    sum += s.action[0];
    sum_sq += s.action[0] * s.action[0];
  }
  const double mu = sum / n;
  const double sd = std::sqrt(sum_sq / n - mu * mu);
  CHECK(std::abs(mu) < 3.0 * sd / std::sqrt(n));

  const ActionVec m2{0.4, -1.2}, ls2{-0.7, 0.1};
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto s = sample_action(m2, ls2, rng);
    worst = std::max(worst, std::abs(s.log_prob - log_prob(m2, ls2, s.action)));
  }
  CHECK(worst < 1e-6);

  CHECK(log_prob(mean, log_std, {0.3, -0.6}) == doctest::Approx(log_prob(mean, log_std, {-0.3, 0.6})));

  // Unimodal along each axis: one peak on a grid, and it sits near tanh(mean).
  // The squash Jacobian shifts the peak by about 2 a sigma^2 in pre-tanh space.
  const ActionVec m3{0.5, -0.2}, ls3{-1.5, -1.5};
  std::vector<double> grid, lps;
  for (double a = -0.99; a <= 0.99; a += 0.01) {
    grid.push_back(a);
    lps.push_back(log_prob(m3, ls3, {a, deterministic_action(m3)[1]}));
  }
  const auto peak = std::max_element(lps.begin(), lps.end()) - lps.begin();
  for (std::size_t i = 1; i < lps.size(); ++i) {
    if (static_cast<long>(i) <= peak) CHECK(lps[i] > lps[i - 1]);
    else CHECK(lps[i] < lps[i - 1]);
  }
  CHECK(std::abs(grid[peak] - std::tanh(m3[0])) < 0.05);

  const ActionVec floor_std{-50.0, -50.0};
  const auto s = sample_action({0.7, -0.3}, floor_std, rng);
  CHECK(s.action[0] == doctest::Approx(std::tanh(0.7)).epsilon(0.05));
  CHECK(s.action[1] == doctest::Approx(std::tanh(-0.3)).epsilon(0.05));

  const auto huge = sample_action({40.0, -40.0}, {-5.0, -5.0}, rng);
  CHECK(std::isfinite(huge.log_prob));
  CHECK(std::abs(huge.action[0]) < 1.0);
}

TEST_CASE("saturated samples keep an exact pre-squash density") {
  std::mt19937_64 rng(5);
  const ActionVec mean{40.0, -12.0}, log_std{-2.0, -2.0};
  for (int i = 0; i < 100; ++i) {
    const auto s = sample_action(mean, log_std, rng);
    CHECK(std::abs(s.pre_tanh[0] - 40.0) < 1.0);
    CHECK(std::abs(s.pre_tanh[1] + 12.0) < 1.0);
    CHECK(s.log_prob == log_prob_pre_tanh(mean, log_std, s.pre_tanh));
    // A nearby mean changes the density smoothly, not through a clamped tail.
    const double shifted = log_prob_pre_tanh({40.01, -12.0}, log_std, s.pre_tanh);
    CHECK(std::abs(shifted - s.log_prob) < 1.0);
  }
  const auto g = log_prob_grad_pre_tanh({0.2, -0.5}, {-0.3, 0.4}, {std::atanh(0.6), std::atanh(-0.1)});
  const auto ga = log_prob_grad({0.2, -0.5}, {-0.3, 0.4}, {0.6, -0.1});
  CHECK(g.log_prob == doctest::Approx(ga.log_prob).epsilon(1e-12));
  CHECK(g.d_mean[0] == doctest::Approx(ga.d_mean[0]).epsilon(1e-12));
}

TEST_CASE("log-prob partials match finite differences") {
  const ActionVec m{0.2, -0.5}, ls{-0.3, 0.4}, a{0.6, -0.1};
  const auto g = log_prob_grad(m, ls, a);
  const double h = 1e-6;
  for (int k = 0; k < 2; ++k) {
    ActionVec mp = m, mm = m, lp = ls, lm = ls;
    mp[k] += h;
    mm[k] -= h;
    lp[k] += h;
    lm[k] -= h;
    CHECK(g.d_mean[k] == doctest::Approx((log_prob(mp, ls, a) - log_prob(mm, ls, a)) / (2 * h)).epsilon(1e-6));
    CHECK(g.d_log_std[k] == doctest::Approx((log_prob(m, lp, a) - log_prob(m, lm, a)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("checkpoint round trip and corruption detection") {
  const auto cfg = small(Mode::kCTCE, {8, 6});
  Checkpoint c{init_params(cfg, 21), Mode::kCTCE, 0xdeadbeefcafeULL};
  c.params.version = 42;
  const std::string bytes = encode_checkpoint(c);
  CHECK(bytes.substr(0, 8) == "JNCKPT01");
  CHECK(bytes.size() == 40 + 12 * c.params.layout.size() + 8 + 4 * c.params.values.size() + 8);

  const auto back = decode_checkpoint(bytes);
  CHECK(back.params.values == c.params.values);
  CHECK(back.params.layout == c.params.layout);
  CHECK(back.params.version == 42);
  CHECK(back.mode == Mode::kCTCE);
  CHECK(back.config_hash == c.config_hash);

  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  CHECK_THROWS_WITH(decode_checkpoint(flipped), doctest::Contains("checksum"));
  CHECK_THROWS(decode_checkpoint(bytes.substr(0, bytes.size() - 3)));
  std::string magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_WITH(decode_checkpoint(magic), doctest::Contains("magic"));

  const auto path = std::filesystem::temp_directory_path() / "junction_test.ckpt";
  save_checkpoint(path, c);
  CHECK(load_checkpoint(path).params.values == c.params.values);
  std::filesystem::remove(path);

  PolicyNetwork net(cfg);
  CHECK_NOTHROW(net.set_params(back.params));
  PolicyNetwork other(small(Mode::kCTDE, {8, 6}));
  CHECK_THROWS(other.set_params(back.params));
}

TEST_CASE("float rounding makes snapshots lossless") {
  const auto cfg = small(Mode::kCTDE, {8});
  PolicyNetwork net(cfg, init_params(cfg, 2));
  for (double& v : net.mutable_params()) v += 1e-9;
  net.round_to_float();
  PolicyNetwork copy(cfg, net.to_parameters(1));
  CHECK(std::equal(net.params().begin(), net.params().end(), copy.params().begin()));
}
