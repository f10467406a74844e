#include "sindyrl/ensemble.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace sindyrl;

namespace {

FeatureLibrary scalar_bias_library() { return FeatureLibrary::polynomial(1, {0, true, true, {}}); }

EnsembleModel model_from(const FeatureLibrary& lib, const std::vector<MatrixXd>& members,
                         Aggregation agg = Aggregation::kMedian) {
  std::vector<CoefficientMatrix> c;
  for (const auto& m : members) c.push_back(CoefficientMatrix::dense(m));
  return EnsembleModel(lib, std::move(c), agg);
}

EnsembleModel random_model(std::mt19937_64& rng, int n_members, int input_dim, int outputs) {
  std::normal_distribution<double> n01;
  auto lib = FeatureLibrary::polynomial(input_dim, {2, true, true, {}});
  std::vector<MatrixXd> members;
  for (int k = 0; k < n_members; ++k) {
    MatrixXd m(lib.size(), outputs);
    for (int i = 0; i < m.size(); ++i) m.data()[i] = n01(rng);
    members.push_back(m);
  }
  return model_from(lib, members);
}

Dataset line_data(int n, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::normal_distribution<double> n01;
  Dataset d;
  d.X.resize(n, 1);
  d.Y.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    d.X(i, 0) = unif(rng);
    d.Y(i, 0) = 2.0 * d.X(i, 0) + noise * n01(rng);
  }
  return d;
}

}  // namespace

TEST_CASE("degenerate ensemble equals a single STLRidge fit") {
  Dataset d = line_data(40, 0.0, 1);
  auto lib = FeatureLibrary::polynomial(1, {2, true, true, {}});
  EnsembleConfig cfg;
  cfg.n_members = 1;
  cfg.threshold = 0.5;
  auto model = ensemble_fit(lib, d, cfg);
  auto single = stlridge_fit(evaluate_features(lib, d.X), d.Y, {0.5, 0.0, 20});
  CHECK((model.member(0).values - single.coefficients.values).norm() < 1e-12);
}

TEST_CASE("fixed seed gives bit-identical members") {
  Dataset d = line_data(60, 0.1, 2);
  auto lib = FeatureLibrary::polynomial(1, {3, true, true, {}});
  EnsembleConfig cfg;
  cfg.n_members = 8;
  cfg.lib_bag_frac = 0.75;
  cfg.threshold = 0.05;
  cfg.seed = 77;
  auto a = ensemble_fit(lib, d, cfg);
  auto b = ensemble_fit(lib, d, cfg);
  for (int k = 0; k < 8; ++k) {
    CHECK(a.member(k).values == b.member(k).values);
    CHECK(a.member(k).mask == b.member(k).mask);
  }
}

TEST_CASE("library bagging keeps ceil(frac d) terms and zeros the rest") {
  Dataset d = line_data(60, 0.1, 3);
  auto lib = FeatureLibrary::polynomial(1, {4, true, true, {}});
  EnsembleConfig cfg;
  cfg.n_members = 10;
  cfg.lib_bag_frac = 0.5;  // ceil(2.5) = 3 of 5
  cfg.threshold = 0.0;
  auto model = ensemble_fit(lib, d, cfg);
  for (const auto& m : model.members()) {
    int kept = 0;
    for (int j = 0; j < 5; ++j) {
      kept += m.mask[j];
      if (!m.mask[j]) CHECK(m.values.row(j).isZero(0));
    }
    CHECK(kept == 3);
  }
}

TEST_CASE("median slope is at least as good as the worst member") {
  auto lib = FeatureLibrary::polynomial(1, {1, true, true, {}});
  for (std::uint64_t s = 0; s < 20; ++s) {
    Dataset d = line_data(100, 0.1, 100 + s);
    EnsembleConfig cfg;
    cfg.n_members = 20;
    cfg.threshold = 0.0;
    cfg.seed = s;
    auto model = ensemble_fit(lib, d, cfg);
    double worst = 0.0;
    for (const auto& m : model.members()) worst = std::max(worst, std::abs(m.values(1, 0) - 2.0));
    CHECK(std::abs(model.aggregated().values(1, 0) - 2.0) <= worst);
  }
}

TEST_CASE("invalid ensemble settings") {
  Dataset d = line_data(10, 0.0, 4);
  auto lib = FeatureLibrary::polynomial(1, {1, true, true, {}});
  EnsembleConfig cfg;
  cfg.n_members = 0;
  CHECK_THROWS(ensemble_fit(lib, d, cfg));
  cfg.n_members = 2;
  cfg.lib_bag_frac = 0.0;
  CHECK_THROWS(ensemble_fit(lib, d, cfg));
  cfg.lib_bag_frac = 1.0;
  CHECK_THROWS(ensemble_fit(lib, Dataset{MatrixXd(0, 1), MatrixXd(0, 1)}, cfg));
}

TEST_CASE("aggregation") {
  auto lib = scalar_bias_library();
  auto one = [](double v) { return MatrixXd::Constant(1, 1, v); };
  CHECK(model_from(lib, {one(1), one(2), one(100)}).aggregated().values(0, 0) == 2.0);
  CHECK(model_from(lib, {one(1), one(2), one(3)}, Aggregation::kMean).aggregated().values(0, 0) == 2.0);
  CHECK(model_from(lib, {one(1), one(2), one(3), one(10)}).aggregated().values(0, 0) == 2.5);
  CHECK(model_from(lib, {one(4), one(4)}).aggregated().values(0, 0) == 4.0);
}

TEST_CASE("masked entries count as zero in the aggregate") {
  auto lib = scalar_bias_library();
  CoefficientMatrix a = CoefficientMatrix::dense(MatrixXd::Constant(1, 1, 3.0));
  CoefficientMatrix b{MatrixXd::Zero(1, 1), {false}};
  EnsembleModel m(lib, {a, b, b}, Aggregation::kMean);
  CHECK(m.aggregated().values(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("prediction") {
  auto lib = FeatureLibrary::polynomial(2, {1, false, true, {}});
  auto identity = model_from(lib, {MatrixXd::Identity(2, 2)});
  VectorXd x(2);
  x << 0.3, -1.7;
  CHECK(predict(identity, x) == x);
  CHECK(predict(model_from(lib, {MatrixXd::Zero(2, 2)}), x).isZero(0));
  CHECK_THROWS_AS(predict(identity, VectorXd(VectorXd::Zero(3))), ShapeError);

  Dataset d = line_data(5, 0.0, 0);
  d.X.col(0) << -1, -0.5, 0, 0.5, 1;
  d.Y = 2.0 * d.X;
  auto quad = FeatureLibrary::polynomial(1, {2, true, true, {}});
  EnsembleConfig cfg;
  cfg.n_members = 1;
  cfg.threshold = 0.5;
  VectorXd three = VectorXd::Constant(1, 3.0);
  CHECK(std::abs(predict(ensemble_fit(quad, d, cfg), three)(0) - 6.0) < 1e-9);
}

TEST_CASE("coefficient covariance") {
  auto lib = scalar_bias_library();
  auto one = [](double v) { return MatrixXd::Constant(1, 1, v); };
  CHECK(coefficient_covariance(model_from(lib, {one(0), one(2)}), 0)(0, 0) == doctest::Approx(2.0));
  CHECK(coefficient_covariance(model_from(lib, {one(5), one(5), one(5)}), 0).isZero(0));
  CHECK_THROWS(coefficient_covariance(model_from(lib, {one(1)}), 0));

  std::mt19937_64 rng(11);
  auto m = random_model(rng, 7, 2, 3);
  for (int i = 0; i < 3; ++i) {
    const int d = m.library().size();
    VectorXd mean = VectorXd::Zero(d);
    for (const auto& c : m.members()) mean += c.values.col(i);
    mean /= 7.0;
    MatrixXd brute = MatrixXd::Zero(d, d);
    for (const auto& c : m.members()) {
      VectorXd dev = c.values.col(i) - mean;
      brute += dev * dev.transpose();
    }
    brute /= 6.0;
    CHECK((coefficient_covariance(m, i) - brute).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("pointwise variance") {
  auto lib = scalar_bias_library();
  auto one = [](double v) { return MatrixXd::Constant(1, 1, v); };
  VectorXd x = VectorXd::Constant(1, 0.7);
  CHECK(pointwise_variance(model_from(lib, {one(0), one(2)}), x) == doctest::Approx(2.0));
  CHECK(pointwise_variance(model_from(lib, {one(3), one(3)}), x) == 0.0);
  CHECK_THROWS(pointwise_variance(model_from(lib, {one(3)}), x));

  std::mt19937_64 rng(12);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 10; ++trial) {
    auto m = random_model(rng, 5 + trial, 3, 2);
    for (int q = 0; q < 10; ++q) {
      VectorXd xq(3);
      for (int i = 0; i < 3; ++i) xq(i) = n01(rng);
      MatrixXd preds(m.n_members(), 2);
      for (int k = 0; k < m.n_members(); ++k) preds.row(k) = predict(m.library(), m.member(k), xq).transpose();
      const double oracle =
          (preds.rowwise() - preds.colwise().mean()).squaredNorm() / (m.n_members() - 1);
      const double v = pointwise_variance(m, xq);
      CHECK(v >= 0.0);
      CHECK(std::abs(v - oracle) <= 1e-10 * std::max(1.0, oracle));
    }
  }
}
