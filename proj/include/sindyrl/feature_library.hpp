#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sindyrl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Raised when array dimensions do not line up with a library or model.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an input contains NaN or infinity.
class NonFiniteError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class TermKind { kConstant, kMonomial, kSin, kCos };

/// One candidate function of the dictionary.
///
/// Monomials carry an exponent per state input. Trig terms act on a single
/// state input. In a control-affine library every term of the g-block also
/// carries the index of the control component that multiplies it.
struct Term {
  TermKind kind = TermKind::kConstant;
  std::vector<int> exponents;  // kMonomial only, length = state_dim
  int input = -1;              // kSin / kCos only
  int control = -1;            // >= 0 for g-block terms

  bool operator==(const Term&) const = default;
};

enum class LibraryStructure { kPlain, kControlAffine };

/// Polynomial (plus optional trig) block description used by the builders.
struct PolynomialSpec {
  int degree = 2;
  bool bias = false;
  bool cross_terms = true;
  std::vector<int> trig_inputs;  // appends sin(x_i), cos(x_i) for each listed input
};

/// Ordered candidate set Theta.
///
/// Ordering within a polynomial block: constant (if any), then degree 1, 2, ...
/// and within a degree the lexicographic order of non-decreasing index tuples
/// (x0^2, x0 x1, x0 x2, x1^2, ...). Trig terms follow as sin, cos per input.
/// A control-affine library is the f-block over x followed by, for each
/// control component c in turn, the g-block over x multiplied by u_c.
class FeatureLibrary {
 public:
  FeatureLibrary() = default;
  FeatureLibrary(LibraryStructure structure, int state_dim, int control_dim,
                 std::vector<Term> terms);

  static FeatureLibrary polynomial(int input_dim, const PolynomialSpec& spec);
  static FeatureLibrary control_affine(int state_dim, int control_dim,
                                       const PolynomialSpec& f,
                                       const PolynomialSpec& g);

  LibraryStructure structure() const { return structure_; }
  int state_dim() const { return state_dim_; }
  int control_dim() const { return control_dim_; }
  int input_dim() const { return state_dim_ + control_dim_; }
  int size() const { return static_cast<int>(terms_.size()); }
  const std::vector<Term>& terms() const { return terms_; }

  /// Human-readable name of term j, e.g. "x0^2 x3" or "x1 u0".
  std::string term_name(int j, const std::vector<std::string>& state_names = {},
                        const std::vector<std::string>& control_names = {}) const;

  /// Evaluates every term on one input row. `out` must have size().
  void evaluate_row(std::span<const double> input, std::span<double> out) const;

  bool operator==(const FeatureLibrary& other) const;

 private:
  struct Factor {
    int input;
    int power;
  };
  struct CompiledTerm {
    TermKind kind;
    std::vector<Factor> factors;
    int input;
    int control;  // column offset into the input row, or -1
  };

  void compile();

  LibraryStructure structure_ = LibraryStructure::kPlain;
  int state_dim_ = 0;
  int control_dim_ = 0;
  std::vector<Term> terms_;
  std::vector<CompiledTerm> compiled_;
};

/// Theta(X): N x size() feature matrix. Rejects shape mismatches and
/// non-finite entries.
MatrixXd evaluate_features(const FeatureLibrary& lib, const MatrixXd& X);

/// Single-point convenience wrapper; returns a length size() vector.
VectorXd evaluate_features(const FeatureLibrary& lib, const VectorXd& x);

}  // namespace sindyrl
