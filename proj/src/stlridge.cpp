#include "sindyrl/stlridge.hpp"

#include <cmath>
#include <numeric>

namespace sindyrl {

int CoefficientMatrix::nonzero_count() const {
  return static_cast<int>((values.array() != 0.0).count());
}

CoefficientMatrix CoefficientMatrix::dense(MatrixXd values) {
  CoefficientMatrix c;
  c.mask.assign(values.rows(), true);
  c.values = std::move(values);
  return c;
}

namespace {

struct SolveResult {
  VectorXd xi;
  bool rank_deficient = false;
};

// Ridge solve restricted to `active`, with columns equilibrated by sqrt(G_jj).
SolveResult ridge_solve(const MatrixXd& gram, const MatrixXd& cross, int col,
                        const std::vector<int>& active, double alpha) {
  const int k = static_cast<int>(active.size());
  MatrixXd G(k, k);
  VectorXd b(k);
  VectorXd scale(k);
  for (int a = 0; a < k; ++a) {
    b(a) = cross(active[a], col);
    const double g = gram(active[a], active[a]);
    scale(a) = g > 0.0 ? std::sqrt(g) : 1.0;
    for (int c = 0; c < k; ++c) G(a, c) = gram(active[a], active[c]);
  }
  const VectorXd inv = scale.cwiseInverse();
  MatrixXd Gs = inv.asDiagonal() * G * inv.asDiagonal();
  const VectorXd bs = inv.cwiseProduct(b);

  SolveResult out;
  if (alpha > 0.0) {
    Gs.diagonal() += alpha * inv.cwiseAbs2();
    Eigen::LLT<MatrixXd> llt(Gs);
    if (llt.info() == Eigen::Success) {
      out.xi = inv.cwiseProduct(llt.solve(bs));
      return out;
    }
  }
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(Gs);
  if (cod.rank() == k) {
    out.xi = inv.cwiseProduct(cod.solve(bs));
    return out;
  }
  // Minimum-norm in the original coordinates: pinv(G) b.
  G.diagonal().array() += alpha;
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> raw(G);
  out.xi = raw.solve(b);
  out.rank_deficient = true;
  return out;
}

}  // namespace

StlRidgeResult stlridge_fit_normal(const MatrixXd& gram, const MatrixXd& cross,
                                   std::span<const int> candidates,
                                   const StlRidgeOptions& options) {
  const int d = static_cast<int>(gram.rows());
  const int n = static_cast<int>(cross.cols());
  if (gram.cols() != d || cross.rows() != d)
    throw ShapeError("stlridge: gram/cross dimensions disagree");
  if (options.threshold < 0.0 || options.alpha < 0.0)
    throw std::invalid_argument("stlridge: threshold and alpha must be nonnegative");
  if (options.max_iter < 1) throw std::invalid_argument("stlridge: max_iter must be >= 1");

  StlRidgeResult result;
  result.coefficients.values = MatrixXd::Zero(d, n);
  result.coefficients.mask.assign(d, false);
  for (int j : candidates) {
    if (j < 0 || j >= d) throw std::out_of_range("stlridge: candidate index out of range");
    result.coefficients.mask[j] = true;
  }
  FitDiagnostics& diag = result.diagnostics;

  std::vector<std::vector<int>> active(n, std::vector<int>(candidates.begin(), candidates.end()));
  std::vector<bool> done(n, false);
  for (int iter = 0; iter < options.max_iter; ++iter) {
    bool any = false;
    int total_active = 0;
    for (int col = 0; col < n; ++col) {
      if (done[col]) {
        total_active += static_cast<int>(active[col].size());
        continue;
      }
      any = true;
      auto& act = active[col];
      result.coefficients.values.col(col).setZero();
      if (act.empty()) {
        done[col] = true;
        continue;
      }
      const SolveResult s = ridge_solve(gram, cross, col, act, options.alpha);
      diag.rank_deficient |= s.rank_deficient;
      diag.iterations = std::max(diag.iterations, iter + 1);
      std::vector<int> kept;
      for (std::size_t a = 0; a < act.size(); ++a) {
        if (std::abs(s.xi(a)) >= options.threshold) {
          kept.push_back(act[a]);
          result.coefficients.values(act[a], col) = s.xi(a);
        }
      }
      if (kept.size() == act.size()) done[col] = true;
      act = std::move(kept);
      total_active += static_cast<int>(act.size());
    }
    if (!any) break;
    diag.active_history.push_back(total_active);
  }
  for (int col = 0; col < n; ++col) diag.converged = diag.converged && done[col];
  if (!result.coefficients.values.allFinite())
    throw NonFiniteError("stlridge: solve produced non-finite coefficients");
  return result;
}

StlRidgeResult stlridge_fit(const MatrixXd& features, const MatrixXd& Y,
                            const StlRidgeOptions& options) {
  if (features.rows() < 1) throw ShapeError("stlridge: need at least one sample");
  if (features.rows() != Y.rows())
    throw ShapeError("stlridge: features and labels have different row counts");
  if (!features.allFinite() || !Y.allFinite())
    throw NonFiniteError("stlridge: non-finite data");
  MatrixXd gram = MatrixXd::Zero(features.cols(), features.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(features.transpose());
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  const MatrixXd cross = features.transpose() * Y;
  std::vector<int> all(features.cols());
  std::iota(all.begin(), all.end(), 0);
  return stlridge_fit_normal(gram, cross, all, options);
}

}  // namespace sindyrl
