#include "sindyrl/surrogate_env.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace sindyrl;

namespace {

std::shared_ptr<const EnsembleModel> linear_model(const MatrixXd& A, const MatrixXd& B, int members = 1) {
  // f-block {x_j}, g-block {1} * u_c: row j of Xi is A column j, last rows are B.
  const auto n = A.rows();
  const auto m = B.cols();
  auto lib = FeatureLibrary::control_affine(static_cast<int>(n), static_cast<int>(m), {1, false, true, {}},
                                            {0, true, true, {}});
  MatrixXd xi(n + m, n);
  xi << A.transpose(), B.transpose();
  std::vector<CoefficientMatrix> c(members, CoefficientMatrix::dense(xi));
  return std::make_shared<const EnsembleModel>(lib, c, Aggregation::kMedian);
}

SurrogateSpec base_spec(std::shared_ptr<const EnsembleModel> dyn, double bound) {
  const int n = dyn->output_dim();
  const int m = dyn->input_dim() - n;
  SurrogateSpec s;
  s.dynamics = std::move(dyn);
  s.reward_fn = [](const VectorXd& x, const VectorXd&) { return x.sum(); };
  s.bounds = StateBounds::symmetric(VectorXd::Constant(n, bound));
  s.action_bounds = {VectorXd::Constant(m, -1.0), VectorXd::Constant(m, 1.0)};
  s.init_sampler = gaussian_sampler(VectorXd::Zero(n), VectorXd::Constant(n, 0.5));
  s.horizon = 50;
  return s;
}

}  // namespace

TEST_CASE("identity dynamics leave the state alone") {
  SurrogateEnv env(base_spec(linear_model(MatrixXd::Identity(3, 3), MatrixXd::Zero(3, 1)), 5.0));
  VectorXd x(3);
  x << 0.1, -0.2, 0.3;
  env.set_state(x);
  StepResult r = env.step(VectorXd::Constant(1, 0.5));
  CHECK(r.observation == x);
  CHECK_FALSE(r.done);
  CHECK(r.reward == doctest::Approx(0.2));
}

TEST_CASE("leaving the box ends the episode") {
  MatrixXd A = MatrixXd::Identity(1, 1);
  MatrixXd B = MatrixXd::Constant(1, 1, 2.0);
  SurrogateEnv env(base_spec(linear_model(A, B), 5.0));
  env.set_state(VectorXd::Constant(1, 4.0));
  StepResult r = env.step(VectorXd::Constant(1, 1.0));
  CHECK(r.observation(0) == 6.0);
  CHECK(r.done);
  CHECK(r.reward == 6.0);
}

TEST_CASE("horizon ends the episode") {
  SurrogateEnv env(base_spec(linear_model(MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 1)), 5.0));
  env.reset(1);
  int steps = 0;
  for (bool done = false; !done; ++steps) done = env.step(VectorXd::Zero(1)).done;
  CHECK(steps == 50);
}

TEST_CASE("fitted linear system steps like the matrix product") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n01;
  MatrixXd A(3, 3), B(3, 2);
  for (int i = 0; i < A.size(); ++i) A.data()[i] = 0.3 * n01(rng);
  A += MatrixXd::Identity(3, 3);
  for (int i = 0; i < B.size(); ++i) B.data()[i] = n01(rng);
  Dataset d;
  d.X.resize(200, 5);
  d.Y.resize(200, 3);
  for (int i = 0; i < 200; ++i) {
    VectorXd x(3), u(2);
    for (int j = 0; j < 3; ++j) x(j) = n01(rng);
    for (int j = 0; j < 2; ++j) u(j) = n01(rng);
    d.X.row(i) << x.transpose(), u.transpose();
    d.Y.row(i) = (A * x + B * u).transpose();
  }
  auto lib = FeatureLibrary::control_affine(3, 2, {1, false, true, {}}, {0, true, true, {}});
  EnsembleConfig cfg;
  cfg.n_members = 5;
  cfg.threshold = 0.0;
  auto model = std::make_shared<const EnsembleModel>(ensemble_fit(lib, d, cfg));
  SurrogateSpec spec = base_spec(model, 100.0);
  spec.action_bounds = {VectorXd::Constant(2, -10.0), VectorXd::Constant(2, 10.0)};
  SurrogateEnv env(spec);
  for (int q = 0; q < 10; ++q) {
    VectorXd x(3), u(2);
    for (int j = 0; j < 3; ++j) x(j) = n01(rng);
    for (int j = 0; j < 2; ++j) u(j) = n01(rng);
    CHECK((env.transition(x, u).observation - (A * x + B * u)).norm() < 1e-10);
  }
}

TEST_CASE("circle renormalization and bounded emission") {
  // Slightly expanding rotation in the (cos, sin) plane plus a drifting coordinate.
  MatrixXd A = MatrixXd::Zero(3, 3);
  A(0, 0) = 1.01 * std::cos(0.1);
  A(0, 1) = -1.01 * std::sin(0.1);
  A(1, 0) = 1.01 * std::sin(0.1);
  A(1, 1) = 1.01 * std::cos(0.1);
  A(2, 2) = 1.05;
  SurrogateSpec spec = base_spec(linear_model(A, MatrixXd::Constant(3, 1, 0.1)), 3.0);
  spec.circle = std::make_pair(0, 1);
  spec.horizon = 1000;
  SurrogateEnv env(spec);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> act(-1, 1);
  for (std::uint64_t ep = 0; ep < 20; ++ep) {
    VectorXd x = env.reset(ep);
    x(0) = 1.0;
    x(1) = 0.0;
    env.set_state(x);
    for (bool done = false; !done;) {
      StepResult r = env.step(VectorXd::Constant(1, act(rng)));
      const double c = r.observation(0), s = r.observation(1);
      CHECK(std::abs(c * c + s * s - 1.0) < 1e-12);
      if (!spec.bounds.contains(r.observation)) CHECK(r.done);
      done = r.done;
    }
  }
}

TEST_CASE("non-finite model output terminates without poisoning the state") {
  SurrogateEnv env(base_spec(linear_model(MatrixXd::Constant(1, 1, 1e308), MatrixXd::Zero(1, 1)), 5.0));
  env.set_state(VectorXd::Constant(1, 4.0));
  StepResult r = env.step(VectorXd::Zero(1));
  CHECK(r.done);
  CHECK(r.observation.allFinite());
}

TEST_CASE("learned reward") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n01;
  MatrixXd xs(300, 2), us(300, 1);
  VectorXd r(300), flat(300);
  for (int i = 0; i < 300; ++i) {
    xs(i, 0) = n01(rng);
    xs(i, 1) = n01(rng);
    us(i, 0) = n01(rng);
    r(i) = -0.1 * (1.5 + 0.8 * xs(i, 0) * xs(i, 0) + 0.3 * xs(i, 1) + 0.1 * us(i, 0) * us(i, 0));
    flat(i) = -0.25;
  }
  EnsembleConfig cfg;
  cfg.n_members = 10;
  cfg.threshold = 1e-3;
  cfg.alpha = 1e-10;
  auto lib = default_reward_library(2, 1);
  auto model = fit_reward_model(xs, us, r, lib, cfg);
  // Terms: 1, x0, x1, u, x0^2, x0x1, x0u, x1^2, x1u, u^2.
  VectorXd want = VectorXd::Zero(10);
  want(0) = -0.15;
  want(2) = -0.03;
  want(4) = -0.08;
  want(9) = -0.01;
  CHECK((model.aggregated().values.col(0) - want).cwiseAbs().maxCoeff() < 1e-6);

  auto constant = fit_reward_model(xs, us, flat, lib, cfg);
  CHECK(constant.aggregated().nonzero_count() == 1);
  CHECK(constant.aggregated().values(0, 0) == doctest::Approx(-0.25));
}

TEST_CASE("surrogate spec validation") {
  auto dyn = linear_model(MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 1));
  SurrogateSpec s = base_spec(dyn, 5.0);
  s.bounds = StateBounds::symmetric(VectorXd::Constant(3, 1.0));
  CHECK_THROWS_AS(SurrogateEnv{s}, ShapeError);
  s = base_spec(dyn, 5.0);
  s.reward_fn = nullptr;
  CHECK_THROWS(SurrogateEnv{s});
  s = base_spec(dyn, 5.0);
  s.init_sampler = nullptr;
  CHECK_THROWS(SurrogateEnv{s});
}
