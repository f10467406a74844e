#include "sindyrl/stlridge.hpp"

#include <doctest.h>

#include <random>

using namespace sindyrl;

namespace {

// Least squares restricted to `support`, by QR on the selected columns.
VectorXd lstsq_on_support(const MatrixXd& F, const VectorXd& y, const std::vector<int>& support) {
  MatrixXd A(F.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) A.col(k) = F.col(support[k]);
  VectorXd c = A.colPivHouseholderQr().solve(y);
  VectorXd out = VectorXd::Zero(F.cols());
  for (std::size_t k = 0; k < support.size(); ++k) out(support[k]) = c(k);
  return out;
}

MatrixXd power_features(const VectorXd& x, int degree) {
  MatrixXd F(x.size(), degree + 1);
  for (int p = 0; p <= degree; ++p) F.col(p) = x.array().pow(p);
  return F;
}

}  // namespace

TEST_CASE("y = 2x with threshold 0.5") {
  VectorXd x(5);
  x << -1, -0.5, 0, 0.5, 1;
  MatrixXd F = power_features(x, 2);
  auto res = stlridge_fit(F, 2.0 * x, {0.5, 0.0, 20});
  VectorXd oracle = lstsq_on_support(F, 2.0 * x, {1});
  CHECK((res.coefficients.values.col(0) - oracle).norm() < 1e-12);
  CHECK(res.coefficients.values(1, 0) == doctest::Approx(2.0));
  CHECK(res.coefficients.values(0, 0) == 0.0);
  CHECK(res.coefficients.values(2, 0) == 0.0);
}

TEST_CASE("zero target gives zero coefficients") {
  MatrixXd F = MatrixXd::Random(30, 4);
  auto res = stlridge_fit(F, MatrixXd::Zero(30, 2), {0.1, 0.0, 20});
  CHECK(res.coefficients.values.isZero(0));
  CHECK(res.coefficients.nonzero_count() == 0);
}

TEST_CASE("cubic with small alpha recovers x - 0.1 x^3") {
  VectorXd x = VectorXd::LinSpaced(50, -2, 2);
  VectorXd y = x.array() - 0.1 * x.array().cube();
  MatrixXd F = power_features(x, 3);
  auto res = stlridge_fit(F, y, {0.05, 1e-8, 20});
  const VectorXd c = res.coefficients.values.col(0);
  CHECK(c(0) == 0.0);
  CHECK(c(2) == 0.0);
  CHECK(std::abs(c(1) - 1.0) < 1e-6);
  CHECK(std::abs(c(3) + 0.1) < 1e-6);
}

TEST_CASE("threshold 0 and alpha 0 is ordinary least squares") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  MatrixXd F(40, 6);
  MatrixXd Y(40, 2);
  for (int i = 0; i < F.size(); ++i) F.data()[i] = n01(rng);
  for (int i = 0; i < Y.size(); ++i) Y.data()[i] = n01(rng);
  auto res = stlridge_fit(F, Y, {0.0, 0.0, 20});
  MatrixXd ols = F.colPivHouseholderQr().solve(Y);
  CHECK((res.coefficients.values - ols).norm() < 1e-10);
  CHECK_FALSE(res.diagnostics.rank_deficient);
}

TEST_CASE("ridge matches the regularized normal equations") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  MatrixXd F(30, 4);
  VectorXd y(30);
  for (int i = 0; i < F.size(); ++i) F.data()[i] = n01(rng);
  for (int i = 0; i < y.size(); ++i) y(i) = n01(rng);
  const double alpha = 0.3;
  auto res = stlridge_fit(F, y, {0.0, alpha, 20});
  VectorXd oracle = (F.transpose() * F + alpha * MatrixXd::Identity(4, 4)).ldlt().solve(F.transpose() * y);
  CHECK((res.coefficients.values.col(0) - oracle).norm() < 1e-10);
}

TEST_CASE("everything thresholded away is a zero column, not an error") {
  VectorXd x = VectorXd::LinSpaced(10, -1, 1);
  auto res = stlridge_fit(power_features(x, 2), 0.01 * x, {1.0, 0.0, 20});
  CHECK(res.coefficients.values.isZero(0));
}

TEST_CASE("rank-deficient block falls back to minimum norm and is flagged") {
  VectorXd x = VectorXd::LinSpaced(20, -1, 1);
  MatrixXd F(20, 2);
  F << x, x;  // duplicated column
  auto res = stlridge_fit(F, 2.0 * x, {0.0, 0.0, 20});
  CHECK(res.diagnostics.rank_deficient);
  CHECK(res.coefficients.values(0, 0) == doctest::Approx(1.0));
  CHECK(res.coefficients.values(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("active set shrinks monotonically and settles within d passes") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 20; ++trial) {
    MatrixXd F(60, 12);
    for (int i = 0; i < F.size(); ++i) F.data()[i] = n01(rng);
    VectorXd xi = VectorXd::Zero(12);
    xi(trial % 12) = 1.5;
    xi((trial + 5) % 12) = -0.4;
    VectorXd y = F * xi;
    for (int i = 0; i < y.size(); ++i) y(i) += 0.05 * n01(rng);
    auto res = stlridge_fit(F, y, {0.1, 1e-3, 100});
    const auto& h = res.diagnostics.active_history;
    for (std::size_t k = 1; k < h.size(); ++k) CHECK(h[k] <= h[k - 1]);
    CHECK(res.diagnostics.converged);
    CHECK(res.diagnostics.iterations <= 12 + 1);
  }
}

TEST_CASE("invalid options") {
  MatrixXd F = MatrixXd::Random(5, 2);
  CHECK_THROWS(stlridge_fit(F, VectorXd::Zero(5), {-1.0, 0.0, 20}));
  CHECK_THROWS(stlridge_fit(F, VectorXd::Zero(5), {0.1, -1.0, 20}));
  CHECK_THROWS(stlridge_fit(F, VectorXd::Zero(4), {0.1, 0.0, 20}));
  CHECK_THROWS(stlridge_fit(MatrixXd(0, 2), MatrixXd(0, 1), {0.1, 0.0, 20}));
}
