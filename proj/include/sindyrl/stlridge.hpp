#pragma once

#include "sindyrl/feature_library.hpp"

#include <span>
#include <vector>

namespace sindyrl {

/// Xi: d x n coefficients plus the library-bagging mask (true = term kept).
/// Rows with mask == false are exactly zero.
struct CoefficientMatrix {
  MatrixXd values;
  std::vector<bool> mask;

  int library_size() const { return static_cast<int>(values.rows()); }
  int output_dim() const { return static_cast<int>(values.cols()); }
  int nonzero_count() const;

  static CoefficientMatrix dense(MatrixXd values);
};

struct StlRidgeOptions {
  double threshold = 0.1;
  double alpha = 0.0;
  int max_iter = 20;
};

struct FitDiagnostics {
  int iterations = 0;           // largest number of ridge solves over output columns
  bool converged = true;        // every column reached a fixed active set
  bool rank_deficient = false;  // some alpha = 0 solve used the minimum-norm fallback
  std::vector<int> active_history;  // total active entries after each pass
};

struct StlRidgeResult {
  CoefficientMatrix coefficients;
  FitDiagnostics diagnostics;
};

/// Sequentially thresholded ridge regression on Y ~ features * Xi.
///
/// Each output column is fit independently: ridge-solve on the active terms,
/// drop entries with |xi| < threshold, repeat until the active set is stable
/// or max_iter solves have run. Inactive entries come back exactly zero.
StlRidgeResult stlridge_fit(const MatrixXd& features, const MatrixXd& Y,
                            const StlRidgeOptions& options);

/// Same iteration from precomputed normal-equation blocks: gram = F^T W F
/// (d x d), cross = F^T W Y (d x n). Only `candidates` may become active; all
/// other rows are zero and masked out.
StlRidgeResult stlridge_fit_normal(const MatrixXd& gram, const MatrixXd& cross,
                                   std::span<const int> candidates,
                                   const StlRidgeOptions& options);

}  // namespace sindyrl
