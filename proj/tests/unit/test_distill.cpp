#include "sindyrl/distill.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace sindyrl;

namespace {

std::shared_ptr<const EnsembleModel> identity_dynamics(int n) {
  auto lib = FeatureLibrary::control_affine(n, 1, {1, false, true, {}}, {0, true, true, {}});
  MatrixXd xi = MatrixXd::Zero(n + 1, n);
  xi.topRows(n).setIdentity();
  return std::make_shared<const EnsembleModel>(lib, std::vector<CoefficientMatrix>{CoefficientMatrix::dense(xi)},
                                               Aggregation::kMedian);
}

SurrogateEnv identity_surrogate(int n) {
  SurrogateSpec s;
  s.dynamics = identity_dynamics(n);
  s.reward_fn = [](const VectorXd&, const VectorXd&) { return 0.0; };
  s.bounds = StateBounds::symmetric(VectorXd::Constant(n, 10.0));
  s.action_bounds = {VectorXd::Constant(1, -1), VectorXd::Constant(1, 1)};
  s.init_sampler = gaussian_sampler(VectorXd::Zero(n), VectorXd::Ones(n));
  return SurrogateEnv(s);
}

const PolicyFn zero_policy = [](const VectorXd&) { return VectorXd::Zero(1); };

}  // namespace

TEST_CASE("ambient mesh size and order") {
  SamplingStrategy st;
  st.kind = SamplingKind::kAmbientMesh;
  st.mesh = {{0, 1, 2}, {-1, 1, 2}};
  MatrixXd X = sample_states(st, nullptr, zero_policy, nullptr);
  REQUIRE(X.rows() == 4);
  MatrixXd want(4, 2);
  want << 0, -1, 0, 1, 1, -1, 1, 1;
  CHECK(X == want);
}

TEST_CASE("projected mesh lies on the circle") {
  SamplingStrategy st;
  st.kind = SamplingKind::kProjectedMesh;
  st.mesh = {{-1, 1, 3}, {-1.1, 1.1, 4}, {-1.1, 1.1, 4}};
  st.circle = std::make_pair(1, 2);
  MatrixXd X = sample_states(st, nullptr, zero_policy, nullptr);
  CHECK(X.rows() == 48);
  for (int i = 0; i < X.rows(); ++i) CHECK(std::abs(std::hypot(X(i, 1), X(i, 2)) - 1.0) < 1e-12);
}

TEST_CASE("mesh bounds can come from the store") {
  DataStore store(10);
  store.add_offline({VectorXd::Constant(2, -1.0), VectorXd::Zero(1), VectorXd::Zero(2), 0});
  store.add_offline({VectorXd::Constant(2, 3.0), VectorXd::Zero(1), VectorXd::Zero(2), 0});
  SamplingStrategy st;
  st.kind = SamplingKind::kAmbientMesh;
  st.mesh_points = 3;
  MatrixXd X = sample_states(st, nullptr, zero_policy, &store);
  CHECK(X.rows() == 9);
  CHECK(X.minCoeff() == -1.0);
  CHECK(X.maxCoeff() == 3.0);
}

TEST_CASE("identity dynamics under a zero policy repeat the initial conditions") {
  SurrogateEnv env = identity_surrogate(3);
  SamplingStrategy st;
  st.kind = SamplingKind::kSurrogateTrajectories;
  st.trajectory_length = 10;
  st.n_samples = 50;
  st.init_sampler = gaussian_sampler(VectorXd::Zero(3), VectorXd::Ones(3));
  MatrixXd X = sample_states(st, &env, zero_policy, nullptr);
  REQUIRE(X.rows() == 50);
  for (int i = 0; i < 50; ++i) CHECK(X.row(i) == X.row(i - i % 10));
  CHECK(X.row(0) != X.row(10));
}

TEST_CASE("zero noise equals the plain trajectory strategy; noise doubles the count") {
  SurrogateEnv env = identity_surrogate(2);
  SamplingStrategy st;
  st.kind = SamplingKind::kSurrogateTrajectories;
  st.trajectory_length = 5;
  st.n_samples = 20;
  st.seed = 4;
  const MatrixXd plain = sample_states(st, &env, zero_policy, nullptr);
  st.kind = SamplingKind::kSurrogateTrajectoriesNoise;
  st.noise = 0.0;
  const MatrixXd zero_noise = sample_states(st, &env, zero_policy, nullptr);
  REQUIRE(zero_noise.rows() == 40);
  for (int i = 0; i < 20; ++i) {
    CHECK(zero_noise.row(2 * i) == plain.row(i));
    CHECK(zero_noise.row(2 * i + 1) == plain.row(i));
  }
  st.noise = 0.1;
  const MatrixXd noisy = sample_states(st, &env, zero_policy, nullptr);
  CHECK(noisy == sample_states(st, &env, zero_policy, nullptr));
  const double spread = (noisy.row(0) - plain.row(0)).norm();
  CHECK(spread > 0.0);
  CHECK(spread < 1.0);
  st.noise = -1.0;
  CHECK_THROWS(sample_states(st, &env, zero_policy, nullptr));
}

TEST_CASE("diverging trajectories are cut and restarted") {
  auto lib = FeatureLibrary::control_affine(1, 1, {1, false, true, {}}, {0, true, true, {}});
  MatrixXd xi(2, 1);
  xi << 2.0, 0.0;
  SurrogateSpec s;
  s.dynamics = std::make_shared<const EnsembleModel>(lib, std::vector<CoefficientMatrix>{CoefficientMatrix::dense(xi)},
                                                     Aggregation::kMedian);
  s.reward_fn = [](const VectorXd&, const VectorXd&) { return 0.0; };
  s.bounds = StateBounds::symmetric(VectorXd::Constant(1, 5.0));
  s.action_bounds = {VectorXd::Constant(1, -1), VectorXd::Constant(1, 1)};
  s.init_sampler = gaussian_sampler(VectorXd::Constant(1, 1.0), VectorXd::Zero(1));
  SurrogateEnv env(s);
  SamplingStrategy st;
  st.kind = SamplingKind::kSurrogateTrajectories;
  st.n_samples = 12;
  MatrixXd X = sample_states(st, &env, zero_policy, nullptr);
  // 1, 2, 4 and then 8 leaves the box.
  for (int i = 0; i < 12; ++i) CHECK(X(i, 0) == std::pow(2.0, i % 3));
}

TEST_CASE("replay sampling") {
  DataStore store(10);
  for (int i = 0; i < 5; ++i)
    store.add_offline({VectorXd::Constant(2, i), VectorXd::Zero(1), VectorXd::Zero(2), 0});
  SamplingStrategy st;
  st.kind = SamplingKind::kReplay;
  st.n_samples = 30;
  MatrixXd X = sample_states(st, nullptr, zero_policy, &store);
  CHECK(X.rows() == 30);
  for (int i = 0; i < 30; ++i) CHECK(X(i, 0) == X(i, 1));
  st.kind = SamplingKind::kReplayNoise;
  CHECK(sample_states(st, nullptr, zero_policy, &store).rows() == 60);
  CHECK_THROWS(sample_states(st, nullptr, zero_policy, nullptr));
}

TEST_CASE("a cubic teacher is recovered") {
  // u = 0.5 - x0 + 0.3 x0 x1^2 - 0.2 x1^3
  const PolicyFn teacher = [](const VectorXd& x) {
    return VectorXd::Constant(1, 0.5 - x(0) + 0.3 * x(0) * x(1) * x(1) - 0.2 * x(1) * x(1) * x(1));
  };
  SamplingStrategy st;
  st.kind = SamplingKind::kAmbientMesh;
  st.mesh = {{-1, 1, 9}, {-1, 1, 9}};
  MatrixXd X = sample_states(st, nullptr, teacher, nullptr);
  DistillConfig cfg;
  cfg.lib_bag_frac = 1.0;
  cfg.n_members = 5;
  DistillResult res = distill_policy(teacher, X, cfg);
  // Cubic with bias in 2 inputs: 1, x0, x1, x0^2, x0x1, x1^2, x0^3, x0^2x1, x0x1^2, x1^3.
  VectorXd want = VectorXd::Zero(10);
  want(0) = 0.5;
  want(1) = -1.0;
  want(8) = 0.3;
  want(9) = -0.2;
  CHECK((res.policy.aggregated().values.col(0) - want).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(res.policy.aggregation() == Aggregation::kMean);
  for (const auto& cell : res.report) CHECK(res.report[res.selected].validation_mse <= cell.validation_mse);
  CHECK(res.report.size() == 12);
}

TEST_CASE("labels are clipped to +-5 and a zero teacher gives a zero policy") {
  MatrixXd X = MatrixXd::Random(40, 2);
  const PolicyFn seven = [](const VectorXd&) { return VectorXd::Constant(1, 7.0); };
  DistillConfig cfg;
  cfg.n_members = 3;
  DistillResult clipped = distill_policy(seven, X, cfg);
  CHECK(predict(clipped.policy, VectorXd(VectorXd::Zero(2)))(0) == doctest::Approx(5.0));

  DistillResult zero = distill_policy(zero_policy, X, cfg);
  CHECK(zero.policy.aggregated().values.isZero(0));

  cfg.thresholds.clear();
  CHECK_THROWS(distill_policy(zero_policy, X, cfg));
  CHECK_THROWS(distill_policy(zero_policy, MatrixXd(0, 2), DistillConfig{}));
}

TEST_CASE("dictionary policy clips to the action bounds") {
  auto lib = FeatureLibrary::polynomial(1, {1, true, true, {}});
  MatrixXd xi(2, 1);
  xi << 0.0, 10.0;
  auto model = std::make_shared<const EnsembleModel>(lib, std::vector<CoefficientMatrix>{CoefficientMatrix::dense(xi)},
                                                     Aggregation::kMean);
  PolicyFn p = dictionary_policy(model, {VectorXd::Constant(1, -1), VectorXd::Constant(1, 1)});
  CHECK(p(VectorXd::Constant(1, 0.05))(0) == doctest::Approx(0.5));
  CHECK(p(VectorXd::Constant(1, 3.0))(0) == 1.0);
}

TEST_CASE("matched-seed comparison") {
  SwingUpInit init;
  CHECK(init.theta_mean == doctest::Approx(3.141592653589793));
  std::unique_ptr<Environment> env = swingup_profile(100).make_env();
  const PolicyFn teacher = [](const VectorXd& x) { return VectorXd::Constant(1, std::tanh(x(4) + x(2))); };
  const PolicyFn student = [&](const VectorXd& x) { return teacher(x); };
  PolicyComparison cmp = compare_policies(*env, teacher, student, 15, 3);
  CHECK(cmp.teacher_returns.size() == 15);
  CHECK(cmp.teacher_returns == cmp.student_returns);
  CHECK(cmp.teacher_median == cmp.student_median);
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
}
