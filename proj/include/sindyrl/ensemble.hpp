#pragma once

#include "sindyrl/feature_library.hpp"
#include "sindyrl/stlridge.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sindyrl {

enum class Aggregation { kMedian, kMean };

std::string to_string(Aggregation a);
Aggregation aggregation_from_string(const std::string& s);

/// Settings for an E-SINDy ensemble fit.
struct EnsembleConfig {
  int n_members = 20;
  double row_bag_frac = 1.0;  // bootstrap draws ceil(frac * N) rows with replacement
  double lib_bag_frac = 1.0;  // each member keeps ceil(frac * d) terms
  double threshold = 0.1;
  double alpha = 0.0;
  int max_iter = 20;
  Aggregation aggregation = Aggregation::kMedian;
  std::uint64_t seed = 0;
};

/// Inputs X (N x input_dim) with labels Y (N x n).
struct Dataset {
  MatrixXd X;
  MatrixXd Y;

  void validate() const;
  Eigen::Index size() const { return X.rows(); }
};

/// A set of coefficient matrices over one shared library.
///
/// Immutable once built; the aggregated coefficients are computed at
/// construction and cached.
class EnsembleModel {
 public:
  EnsembleModel() = default;
  EnsembleModel(FeatureLibrary library, std::vector<CoefficientMatrix> members,
                Aggregation aggregation, EnsembleConfig fit_meta = {});

  const FeatureLibrary& library() const { return library_; }
  const std::vector<CoefficientMatrix>& members() const { return members_; }
  const CoefficientMatrix& member(int k) const { return members_.at(k); }
  int n_members() const { return static_cast<int>(members_.size()); }
  int output_dim() const { return output_dim_; }
  int input_dim() const { return library_.input_dim(); }
  Aggregation aggregation() const { return aggregation_; }
  const EnsembleConfig& fit_meta() const { return fit_meta_; }
  const FitDiagnostics& diagnostics() const { return diagnostics_; }
  void set_diagnostics(FitDiagnostics d) { diagnostics_ = std::move(d); }

  /// Xi*: entrywise median or mean over all members (masked entries count as 0).
  const CoefficientMatrix& aggregated() const { return aggregated_; }

 private:
  FeatureLibrary library_;
  std::vector<CoefficientMatrix> members_;
  Aggregation aggregation_ = Aggregation::kMedian;
  EnsembleConfig fit_meta_;
  FitDiagnostics diagnostics_;
  CoefficientMatrix aggregated_;
  int output_dim_ = 0;
};

/// Bagged and library-bagged STLRidge fits. Member k draws from its own
/// generator seeded by (config.seed, k), so results do not depend on the
/// order members are fit in.
EnsembleModel ensemble_fit(const FeatureLibrary& lib, const Dataset& data,
                           const EnsembleConfig& config);

/// Entrywise median/mean of member coefficient matrices.
CoefficientMatrix aggregate(const std::vector<CoefficientMatrix>& members,
                            Aggregation aggregation);
CoefficientMatrix aggregate(const EnsembleModel& model);

VectorXd predict(const FeatureLibrary& lib, const CoefficientMatrix& xi, const VectorXd& x);
VectorXd predict(const EnsembleModel& model, const VectorXd& x);
/// Row-wise prediction for N x input_dim inputs.
MatrixXd predict(const EnsembleModel& model, const MatrixXd& X);

/// Sample covariance (ddof = 1) of member coefficient vectors for output i.
MatrixXd coefficient_covariance(const EnsembleModel& model, int output_index);

/// sum_i Theta(x) Cov(xi_i) Theta(x)^T.
double pointwise_variance(const EnsembleModel& model, const VectorXd& x);

/// Caches every output's covariance for repeated variance queries.
class VarianceEvaluator {
 public:
  explicit VarianceEvaluator(const EnsembleModel& model);
  double operator()(const VectorXd& x) const;

 private:
  const EnsembleModel* model_;
  std::vector<MatrixXd> covariances_;
};

}  // namespace sindyrl
