#include "sindyrl/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace sindyrl {

std::string to_string(Aggregation a) { return a == Aggregation::kMedian ? "median" : "mean"; }

Aggregation aggregation_from_string(const std::string& s) {
  if (s == "median") return Aggregation::kMedian;
  if (s == "mean") return Aggregation::kMean;
  throw std::invalid_argument("unknown aggregation '" + s + "' (expected median|mean)");
}

void Dataset::validate() const {
  if (X.rows() < 1) throw ShapeError("dataset is empty");
  if (X.rows() != Y.rows()) throw ShapeError("dataset X and Y row counts differ");
  if (!X.allFinite() || !Y.allFinite()) throw NonFiniteError("dataset has non-finite entries");
}

EnsembleModel::EnsembleModel(FeatureLibrary library, std::vector<CoefficientMatrix> members,
                             Aggregation aggregation, EnsembleConfig fit_meta)
    : library_(std::move(library)),
      members_(std::move(members)),
      aggregation_(aggregation),
      fit_meta_(fit_meta) {
  if (members_.empty()) throw std::invalid_argument("ensemble needs at least one member");
  output_dim_ = members_.front().output_dim();
  for (const auto& m : members_) {
    if (m.library_size() != library_.size() || m.output_dim() != output_dim_)
      throw ShapeError("ensemble members disagree on shape");
    if (static_cast<int>(m.mask.size()) != library_.size())
      throw ShapeError("member mask length does not match library");
    if (!m.values.allFinite()) throw NonFiniteError("ensemble member has non-finite entries");
    for (int j = 0; j < m.library_size(); ++j)
      if (!m.mask[j] && !m.values.row(j).isZero(0.0))
        throw std::invalid_argument("masked-out coefficient row is not zero");
  }
  fit_meta_.n_members = n_members();
  fit_meta_.aggregation = aggregation_;
  aggregated_ = aggregate(members_, aggregation_);
}

namespace {

Eigen::Index bag_count(double frac, Eigen::Index total) {
  return static_cast<Eigen::Index>(std::ceil(frac * static_cast<double>(total) - 1e-9));
}

}  // namespace

EnsembleModel ensemble_fit(const FeatureLibrary& lib, const Dataset& data,
                           const EnsembleConfig& config) {
  data.validate();
  if (config.n_members < 1) throw std::invalid_argument("ensemble_fit: n_members must be >= 1");
  if (!(config.row_bag_frac > 0.0 && config.row_bag_frac <= 1.0))
    throw std::invalid_argument("ensemble_fit: row_bag_frac must lie in (0, 1]");
  if (!(config.lib_bag_frac > 0.0 && config.lib_bag_frac <= 1.0))
    throw std::invalid_argument("ensemble_fit: lib_bag_frac must lie in (0, 1]");

  const MatrixXd theta = evaluate_features(lib, data.X);
  const Eigen::Index N = theta.rows();
  const int d = lib.size();
  const Eigen::Index n_rows = std::max<Eigen::Index>(1, bag_count(config.row_bag_frac, N));
  const int n_terms = static_cast<int>(bag_count(config.lib_bag_frac, d));
  if (n_terms < 1) throw std::invalid_argument("ensemble_fit: library bagging keeps no terms");

  const StlRidgeOptions opts{config.threshold, config.alpha, config.max_iter};
  std::vector<CoefficientMatrix> members;
  members.reserve(config.n_members);
  FitDiagnostics merged;
  for (int k = 0; k < config.n_members; ++k) {
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                      static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(k)};
    std::mt19937_64 rng(seq);

    VectorXd weights = VectorXd::Zero(N);
    std::uniform_int_distribution<Eigen::Index> row(0, N - 1);
    for (Eigen::Index r = 0; r < n_rows; ++r) weights(row(rng)) += 1.0;

    std::vector<int> terms(d);
    std::iota(terms.begin(), terms.end(), 0);
    if (n_terms < d) {
      for (int i = 0; i < n_terms; ++i) {
        std::uniform_int_distribution<int> pick(i, d - 1);
        std::swap(terms[i], terms[pick(rng)]);
      }
      terms.resize(n_terms);
      std::sort(terms.begin(), terms.end());
    }

    const MatrixXd weighted = theta.array().colwise() * weights.array().sqrt();
    MatrixXd gram = MatrixXd::Zero(d, d);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose());
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
    const MatrixXd cross = theta.transpose() * (data.Y.array().colwise() * weights.array()).matrix();

    StlRidgeResult fit = stlridge_fit_normal(gram, cross, terms, opts);
    merged.iterations = std::max(merged.iterations, fit.diagnostics.iterations);
    merged.converged = merged.converged && fit.diagnostics.converged;
    merged.rank_deficient = merged.rank_deficient || fit.diagnostics.rank_deficient;
    members.push_back(std::move(fit.coefficients));
  }
  EnsembleModel model(lib, std::move(members), config.aggregation, config);
  model.set_diagnostics(std::move(merged));
  return model;
}

CoefficientMatrix aggregate(const std::vector<CoefficientMatrix>& members,
                            Aggregation aggregation) {
  if (members.empty()) throw std::invalid_argument("aggregate: no members");
  const auto rows = members.front().values.rows();
  const auto cols = members.front().values.cols();
  const std::size_t n = members.size();
  MatrixXd out(rows, cols);
  std::vector<double> column(n);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (std::size_t k = 0; k < n; ++k) column[k] = members[k].values(i, j);
      if (aggregation == Aggregation::kMean) {
        out(i, j) = std::accumulate(column.begin(), column.end(), 0.0) / static_cast<double>(n);
      } else {
        std::sort(column.begin(), column.end());
        out(i, j) = n % 2 == 1 ? column[n / 2] : 0.5 * (column[n / 2 - 1] + column[n / 2]);
      }
    }
  }
  return CoefficientMatrix::dense(std::move(out));
}

CoefficientMatrix aggregate(const EnsembleModel& model) {
  return aggregate(model.members(), model.aggregation());
}

VectorXd predict(const FeatureLibrary& lib, const CoefficientMatrix& xi, const VectorXd& x) {
  if (xi.library_size() != lib.size()) throw ShapeError("predict: coefficients do not match library");
  return xi.values.transpose() * evaluate_features(lib, x);
}

VectorXd predict(const EnsembleModel& model, const VectorXd& x) {
  return predict(model.library(), model.aggregated(), x);
}

MatrixXd predict(const EnsembleModel& model, const MatrixXd& X) {
  return evaluate_features(model.library(), X) * model.aggregated().values;
}

MatrixXd coefficient_covariance(const EnsembleModel& model, int output_index) {
  const int ne = model.n_members();
  if (ne < 2) throw std::invalid_argument("coefficient_covariance: needs at least two members");
  if (output_index < 0 || output_index >= model.output_dim())
    throw std::out_of_range("coefficient_covariance: output index out of range");
  const int d = model.library().size();
  MatrixXd coeffs(d, ne);
  for (int k = 0; k < ne; ++k) coeffs.col(k) = model.member(k).values.col(output_index);
  const VectorXd mean = coeffs.rowwise().mean();
  coeffs.colwise() -= mean;
  return coeffs * coeffs.transpose() / static_cast<double>(ne - 1);
}

VarianceEvaluator::VarianceEvaluator(const EnsembleModel& model) : model_(&model) {
  covariances_.reserve(model.output_dim());
  for (int i = 0; i < model.output_dim(); ++i)
    covariances_.push_back(coefficient_covariance(model, i));
}

double VarianceEvaluator::operator()(const VectorXd& x) const {
  const VectorXd theta = evaluate_features(model_->library(), x);
  double total = 0.0;
  for (const MatrixXd& cov : covariances_) total += theta.dot(cov * theta);
  return std::max(total, 0.0);
}

double pointwise_variance(const EnsembleModel& model, const VectorXd& x) {
  return VarianceEvaluator(model)(x);
}

}  // namespace sindyrl
