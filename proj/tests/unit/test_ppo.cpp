#include "sindyrl/ppo.hpp"
#include "sindyrl/rollout.hpp"
#include "sindyrl/swingup.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace sindyrl;

namespace {

// Scalar environment with constant reward and a configurable horizon.
class ConstantEnv final : public Environment {
 public:
  ConstantEnv(double reward, int horizon) : reward_(reward), horizon_(horizon) {}
  int observation_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  ActionBounds action_bounds() const override { return {VectorXd::Constant(1, -1), VectorXd::Constant(1, 1)}; }
  int horizon() const override { return horizon_; }
  VectorXd reset(std::uint64_t seed) override {
    t_ = 0;
    x_ = static_cast<double>(seed % 7) / 7.0;
    return VectorXd::Constant(1, x_);
  }
  StepResult step(const VectorXd& u) override {
    ++t_;
    x_ = 0.9 * x_ + 0.1 * u(0);
    return {VectorXd::Constant(1, x_), reward_, t_ >= horizon_, {}};
  }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<ConstantEnv>(*this); }
  std::string name() const override { return "constant"; }
  std::vector<std::string> observation_names() const override { return {"x"}; }

 private:
  double reward_;
  int horizon_;
  double x_ = 0.0;
  int t_ = 0;
};

ActionBounds unit_bounds(int n) { return {VectorXd::Constant(n, -1), VectorXd::Constant(n, 1)}; }

RolloutBatch random_batch(std::mt19937_64& rng, int T, double done_prob) {
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> unif;
  RolloutBatch b;
  b.rewards.resize(T);
  b.values.resize(T);
  b.dones.resize(T);
  for (int t = 0; t < T; ++t) {
    b.rewards(t) = n01(rng);
    b.values(t) = n01(rng);
    b.dones(t) = unif(rng) < done_prob ? 1.0 : 0.0;
  }
  b.bootstrap_value = n01(rng);
  return b;
}

// A_t = sum_{k >= 0} (gamma lambda)^k delta_{t+k}, cut after the first done.
VectorXd brute_force_gae(const RolloutBatch& b, double gamma, double lambda) {
  const Eigen::Index T = b.size();
  VectorXd adv(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    double sum = 0.0;
    double w = 1.0;
    for (Eigen::Index k = t; k < T; ++k) {
      const double next_v = k + 1 < T ? b.values(k + 1) : b.bootstrap_value;
      const double delta = b.rewards(k) + gamma * next_v * (1.0 - b.dones(k)) - b.values(k);
      sum += w * delta;
      if (b.dones(k) > 0.5) break;
      w *= gamma * lambda;
    }
    adv(t) = sum;
  }
  return adv;
}

Minibatch random_minibatch(std::mt19937_64& rng, const ActorCritic& ac, int B) {
  std::normal_distribution<double> n01;
  Minibatch mb;
  const int od = ac.observation_dim(), ad = ac.action_dim();
  mb.observations.resize(od, B);
  mb.actions.resize(ad, B);
  mb.old_log_probs.resize(B);
  mb.advantages.resize(B);
  mb.returns.resize(B);
  mb.old_values.resize(B);
  for (int i = 0; i < B; ++i) {
    for (int j = 0; j < od; ++j) mb.observations(j, i) = n01(rng);
    const VectorXd mean = ac.mean_action(mb.observations.col(i));
    for (int j = 0; j < ad; ++j) mb.actions(j, i) = mean(j) + 0.8 * n01(rng);
    mb.old_log_probs(i) = ac.log_prob(mb.observations.col(i), mb.actions.col(i)) + 0.3 * n01(rng);
    mb.advantages(i) = n01(rng);
    mb.returns(i) = n01(rng);
    mb.old_values(i) = ac.state_value(mb.observations.col(i)) + 0.3 * n01(rng);
  }
  return mb;
}

}  // namespace

TEST_CASE("GAE special cases") {
  std::mt19937_64 rng(1);
  RolloutBatch b = random_batch(rng, 6, 0.0);
  b.values.setZero();
  b.bootstrap_value = 0.0;
  b.dones(5) = 1.0;
  gae_advantages(b, 1.0, 1.0);
  for (int t = 0; t < 6; ++t) CHECK(b.advantages(t) == doctest::Approx(b.rewards.tail(6 - t).sum()));

  b.rewards.setZero();
  gae_advantages(b, 0.99, 0.95);
  CHECK(b.advantages.isZero(0));
}

TEST_CASE("GAE matches brute-force summation") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    RolloutBatch b = random_batch(rng, 3 + trial % 8, 0.25);
    gae_advantages(b, 0.99, 0.95);
    CHECK((b.advantages - brute_force_gae(b, 0.99, 0.95)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((b.returns - (b.advantages + b.values)).norm() == 0.0);
  }
}

TEST_CASE("policy surrogate identities") {
  std::mt19937_64 rng(3);
  ActorCritic ac = ActorCritic::create(2, 1, unit_bounds(1), {4}, 1);
  PpoConfig cfg;
  Minibatch mb = random_minibatch(rng, ac, 16);
  mb.advantages.setZero();
  CHECK(ppo_loss(ac, mb, cfg).policy_loss == 0.0);

  mb = random_minibatch(rng, ac, 16);
  for (int i = 0; i < 16; ++i) mb.old_log_probs(i) = ac.log_prob(mb.observations.col(i), mb.actions.col(i));
  CHECK(ppo_loss(ac, mb, cfg).policy_loss == doctest::Approx(-mb.advantages.mean()).epsilon(1e-12));
}

TEST_CASE("PPO gradients match central differences on a 1-4-1 network") {
  std::mt19937_64 rng(4);
  PpoConfig cfg;
  cfg.entropy_coef = 0.01;
  for (int trial = 0; trial < 5; ++trial) {
    ActorCritic ac = ActorCritic::create(1, 1, unit_bounds(1), {4}, 10 + trial);
    std::normal_distribution<double> n01;
    for (Eigen::Index i = 0; i < ac.policy.num_params(); ++i) ac.policy.params()(i) += 0.5 * n01(rng);
    ac.log_std(0) = -0.4;
    Minibatch mb = random_minibatch(rng, ac, 32);
    const PpoLoss loss = ppo_loss(ac, mb, cfg);
    const double h = 1e-5;
    auto check_block = [&](VectorXd& params, const VectorXd& grad) {
      for (Eigen::Index i = 0; i < params.size(); ++i) {
        const double keep = params(i);
        params(i) = keep + h;
        const double up = ppo_loss(ac, mb, cfg).total;
        params(i) = keep - h;
        const double down = ppo_loss(ac, mb, cfg).total;
        params(i) = keep;
        const double fd = (up - down) / (2 * h);
        CHECK(std::abs(grad(i) - fd) <= 1e-4 * std::max(std::abs(fd), std::abs(grad(i))) + 1e-9);
      }
    };
    check_block(ac.policy.params(), loss.grad_policy);
    check_block(ac.log_std, loss.grad_log_std);
    check_block(ac.value.params(), loss.grad_value);
  }
}

TEST_CASE("advantage normalization") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  VectorXd a(500);
  for (int i = 0; i < 500; ++i) a(i) = 3.0 + 7.0 * n01(rng);
  normalize_advantages(a);
  CHECK(std::abs(a.mean()) < 1e-8);
  CHECK(std::abs(std::sqrt(a.squaredNorm() / 500.0) - 1.0) < 1e-6);
}

TEST_CASE("rollout collection") {
  ActorCritic ac = ActorCritic::create(1, 1, unit_bounds(1), {4}, 2);
  RolloutCollector one(std::make_unique<ConstantEnv>(1.0, 10), 3);
  CHECK(one.collect(ac, 1).size() == 1);

  RolloutCollector a(std::make_unique<ConstantEnv>(1.0, 10), 3);
  RolloutCollector b(std::make_unique<ConstantEnv>(1.0, 10), 3);
  RolloutBatch ba = a.collect(ac, 25), bb = b.collect(ac, 25);
  CHECK(ba.actions == bb.actions);
  CHECK(ba.observations == bb.observations);
  CHECK(ba.completed_episode_returns.size() == 2);
  for (int t = 0; t < 25; ++t)
    CHECK(std::abs(gaussian_log_prob(ba.actions.col(t), ac.mean_action(ba.observations.col(t)), ac.log_std) -
                   ba.log_probs(t)) < 1e-10);

  const double z = 0.3;
  const double want = -0.5 * z * z - 0.0 - 0.5 * std::log(2.0 * 3.141592653589793);
  CHECK(gaussian_log_prob(VectorXd::Constant(1, z), VectorXd::Zero(1), VectorXd::Zero(1)) ==
        doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("evaluation returns") {
  const PolicyFn zero = [](const VectorXd&) { return VectorXd::Zero(1); };
  ConstantEnv none(0.0, 1000), ones(1.0, 1000);
  CHECK(evaluate(none, zero, 3, 0).mean == 0.0);
  EvalResult r = evaluate(ones, zero, 2, 0);
  CHECK(r.mean == 1000.0);
  CHECK(r.steps == 2000);

  SwingUp env;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unif(-1, 1);
  const PolicyFn random = [&](const VectorXd&) { return VectorXd::Constant(1, unif(rng)); };
  CHECK(evaluate(env, random, 3, 1).mean < 300.0);
}

TEST_CASE("learning rate anneals linearly with update count") {
  ActorCritic ac = ActorCritic::create(1, 1, unit_bounds(1), {4}, 2);
  PpoConfig cfg;
  cfg.batch_size = 32;
  cfg.minibatch_size = 8;
  cfg.anneal_updates = 4;
  PpoTrainer trainer(ac, cfg, 1);
  RolloutCollector col(std::make_unique<ConstantEnv>(1.0, 10), 3);
  for (int k = 0; k <= 5; ++k) {
    const double frac = std::min(1.0, k / 4.0);
    CHECK(trainer.learning_rate() == doctest::Approx(cfg.lr_start + (cfg.lr_end - cfg.lr_start) * frac));
    RolloutBatch b = col.collect(ac, 32);
    CHECK(trainer.update(b).learning_rate == doctest::Approx(cfg.lr_start + (cfg.lr_end - cfg.lr_start) * frac));
  }
  CHECK(trainer.updates_done() == 6);
}

TEST_CASE("training is deterministic and resumable") {
  PpoConfig cfg;
  cfg.batch_size = 64;
  cfg.minibatch_size = 16;
  auto run = [&](int split) {
    ActorCritic ac = ActorCritic::create(1, 1, unit_bounds(1), {4}, 2);
    auto trainer = std::make_unique<PpoTrainer>(ac, cfg, 5);
    RolloutCollector col(std::make_unique<ConstantEnv>(0.5, 20), 3);
    for (int k = 0; k < 4; ++k) {
      if (k == split) {
        const auto state = trainer->state_to_json();
        trainer = std::make_unique<PpoTrainer>(ac, cfg, 999);
        trainer->restore_state(state);
      }
      RolloutBatch b = col.collect(ac, 64);
      trainer->update(b);
    }
    return ac.policy.params();
  };
  const VectorXd straight = run(-1);
  CHECK(run(-1) == straight);
  CHECK(run(2) == straight);
}

TEST_CASE("invalid PPO settings") {
  PpoConfig cfg;
  cfg.gamma = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.minibatch_size = 0;
  CHECK_THROWS(cfg.validate());
}
