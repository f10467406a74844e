#include "sindyrl/mlp.hpp"
#include "sindyrl/policy.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace sindyrl;

TEST_CASE("hand-set 1-2-1 network") {
  Mlp net({1, 2, 1});
  net.weight(0) << 0.5, -1.0;
  net.bias(0) << 0.1, 0.2;
  net.weight(1) << 2.0, 3.0;
  net.bias(1) << -0.5;
  const double x = 0.7;
  const double want = 2.0 * std::tanh(0.5 * x + 0.1) + 3.0 * std::tanh(-1.0 * x + 0.2) - 0.5;
  CHECK(net.forward(VectorXd(VectorXd::Constant(1, x)))(0) == doctest::Approx(want).epsilon(1e-15));
  MatrixXd batch(1, 2);
  batch << x, x;
  MatrixXd out = net.forward(batch);
  CHECK(out(0, 0) == out(0, 1));
}

TEST_CASE("zero output layer gives a zero mean action") {
  ActionBounds b{VectorXd::Constant(1, -1), VectorXd::Constant(1, 1)};
  ActorCritic ac = ActorCritic::create(3, 1, b, {8, 8}, 4);
  ac.policy.weight(ac.policy.num_layers() - 1).setZero();
  ac.policy.bias(ac.policy.num_layers() - 1).setZero();
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  for (int i = 0; i < 20; ++i) {
    VectorXd x(3);
    for (int j = 0; j < 3; ++j) x(j) = 3 * n01(rng);
    CHECK(policy_mean(ac, x).isZero(0));
  }
  VectorXd x = VectorXd::Constant(3, 0.4);
  CHECK(ac.state_value(x) == ac.state_value(x));
}

TEST_CASE("normc rows have the requested norm and biases start at zero") {
  Mlp net({4, 16, 2});
  std::mt19937_64 rng(3);
  net.init_normc(rng, 1.0, 0.01);
  for (int r = 0; r < 16; ++r) CHECK(net.weight(0).row(r).norm() == doctest::Approx(1.0));
  for (int r = 0; r < 2; ++r) CHECK(net.weight(1).row(r).norm() == doctest::Approx(0.01));
  CHECK(net.bias(0).isZero(0));
  CHECK(net.bias(1).isZero(0));
}

TEST_CASE("backward matches finite differences") {
  Mlp net({3, 5, 4, 2});
  std::mt19937_64 rng(5);
  net.init_normc(rng, 1.0, 1.0);
  std::normal_distribution<double> n01;
  for (Eigen::Index i = 0; i < net.num_params(); ++i) net.params()(i) += 0.1 * n01(rng);
  MatrixXd X(3, 6), G(2, 6);
  for (int i = 0; i < X.size(); ++i) X.data()[i] = n01(rng);
  for (int i = 0; i < G.size(); ++i) G.data()[i] = n01(rng);
  // L = sum(G .* f(X))
  Mlp::Cache cache;
  net.forward(X, &cache);
  VectorXd grad = VectorXd::Zero(net.num_params());
  net.backward(cache, G, grad);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < net.num_params(); ++i) {
    Mlp p = net, m = net;
    p.params()(i) += h;
    m.params()(i) -= h;
    const double fd = ((G.array() * p.forward(X).array()).sum() - (G.array() * m.forward(X).array()).sum()) / (2 * h);
    CHECK(std::abs(grad(i) - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("adam step matches the textbook update") {
  Adam adam(2, 0.9, 0.999, 1e-5);
  VectorXd p(2), g(2);
  p << 1.0, -2.0;
  g << 0.5, -0.25;
  adam.step(p, g, 0.1);
  // After one step m_hat = g and v_hat = g^2, so the move is lr * g / (|g| + eps).
  CHECK(p(0) == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-5)));
  CHECK(p(1) == doctest::Approx(-2.0 + 0.1 * 0.25 / (0.25 + 1e-5)));
  CHECK(adam.steps() == 1);
}

TEST_CASE("policy checkpoint round trip") {
  ActionBounds b{VectorXd::Constant(2, -1), VectorXd::Constant(2, 2)};
  ActorCritic ac = ActorCritic::create(4, 2, b, {6, 6}, 9);
  ac.log_std << -0.3, 0.2;
  ActorCritic back = actor_critic_from_json(actor_critic_to_json(ac));
  CHECK(back.policy.params() == ac.policy.params());
  CHECK(back.value.params() == ac.value.params());
  CHECK(back.log_std == ac.log_std);
  CHECK(back.bounds.high == ac.bounds.high);
  CHECK(back.policy.sizes() == ac.policy.sizes());
}

TEST_CASE("derived seeds") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}
