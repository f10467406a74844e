#include "sindyrl/feature_library.hpp"

#include <cmath>
#include <sstream>

namespace sindyrl {

namespace {

// Non-decreasing index tuples of the given length, in lexicographic order.
void combinations_with_replacement(int n, int length, bool cross_terms,
                                   std::vector<std::vector<int>>& out) {
  if (length == 0) return;
  if (!cross_terms) {
    for (int i = 0; i < n; ++i) out.emplace_back(length, i);
    return;
  }
  std::vector<int> idx(length, 0);
  while (true) {
    out.push_back(idx);
    int pos = length - 1;
    while (pos >= 0 && idx[pos] == n - 1) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int k = pos + 1; k < length; ++k) idx[k] = idx[pos];
  }
}

std::vector<Term> polynomial_block(int dim, const PolynomialSpec& spec,
                                   int control) {
  if (spec.degree < 0) throw std::invalid_argument("polynomial degree must be >= 0");
  std::vector<Term> terms;
  if (spec.bias) terms.push_back(Term{TermKind::kConstant, {}, -1, control});
  for (int deg = 1; deg <= spec.degree; ++deg) {
    std::vector<std::vector<int>> combos;
    combinations_with_replacement(dim, deg, spec.cross_terms, combos);
    for (const auto& combo : combos) {
      Term t{TermKind::kMonomial, std::vector<int>(dim, 0), -1, control};
      for (int i : combo) ++t.exponents[i];
      terms.push_back(std::move(t));
    }
  }
  for (int i : spec.trig_inputs) {
    if (i < 0 || i >= dim) throw std::invalid_argument("trig input index out of range");
    terms.push_back(Term{TermKind::kSin, {}, i, control});
    terms.push_back(Term{TermKind::kCos, {}, i, control});
  }
  return terms;
}

}  // namespace

FeatureLibrary::FeatureLibrary(LibraryStructure structure, int state_dim,
                               int control_dim, std::vector<Term> terms)
    : structure_(structure),
      state_dim_(state_dim),
      control_dim_(control_dim),
      terms_(std::move(terms)) {
  if (state_dim_ < 1) throw std::invalid_argument("library needs at least one state input");
  if (structure_ == LibraryStructure::kPlain && control_dim_ != 0)
    throw std::invalid_argument("plain library cannot have control inputs");
  if (structure_ == LibraryStructure::kControlAffine && control_dim_ < 1)
    throw std::invalid_argument("control-affine library needs control_dim >= 1");
  if (terms_.empty()) throw std::invalid_argument("library has no terms");
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    const Term& t = terms_[j];
    if (t.kind == TermKind::kMonomial &&
        static_cast<int>(t.exponents.size()) != state_dim_)
      throw std::invalid_argument("monomial exponent vector has wrong length");
    if ((t.kind == TermKind::kSin || t.kind == TermKind::kCos) &&
        (t.input < 0 || t.input >= state_dim_))
      throw std::invalid_argument("trig term input out of range");
    if (t.control >= control_dim_ || t.control < -1)
      throw std::invalid_argument("term control index out of range");
    for (std::size_t k = 0; k < j; ++k)
      if (terms_[k] == t) throw std::invalid_argument("duplicate library term");
  }
  compile();
}

FeatureLibrary FeatureLibrary::polynomial(int input_dim, const PolynomialSpec& spec) {
  return FeatureLibrary(LibraryStructure::kPlain, input_dim, 0,
                        polynomial_block(input_dim, spec, -1));
}

FeatureLibrary FeatureLibrary::control_affine(int state_dim, int control_dim,
                                              const PolynomialSpec& f,
                                              const PolynomialSpec& g) {
  std::vector<Term> terms = polynomial_block(state_dim, f, -1);
  for (int c = 0; c < control_dim; ++c) {
    auto block = polynomial_block(state_dim, g, c);
    terms.insert(terms.end(), block.begin(), block.end());
  }
  return FeatureLibrary(LibraryStructure::kControlAffine, state_dim, control_dim,
                        std::move(terms));
}

void FeatureLibrary::compile() {
  compiled_.clear();
  compiled_.reserve(terms_.size());
  for (const Term& t : terms_) {
    CompiledTerm c{t.kind, {}, t.input, t.control < 0 ? -1 : state_dim_ + t.control};
    if (t.kind == TermKind::kMonomial)
      for (int i = 0; i < state_dim_; ++i)
        if (t.exponents[i] > 0) c.factors.push_back({i, t.exponents[i]});
    compiled_.push_back(std::move(c));
  }
}

void FeatureLibrary::evaluate_row(std::span<const double> input,
                                  std::span<double> out) const {
  for (std::size_t j = 0; j < compiled_.size(); ++j) {
    const CompiledTerm& c = compiled_[j];
    double v = 1.0;
    switch (c.kind) {
      case TermKind::kConstant:
        break;
      case TermKind::kMonomial:
        for (const Factor& f : c.factors) {
          const double base = input[f.input];
          for (int p = 0; p < f.power; ++p) v *= base;
        }
        break;
      case TermKind::kSin:
        v = std::sin(input[c.input]);
        break;
      case TermKind::kCos:
        v = std::cos(input[c.input]);
        break;
    }
    if (c.control >= 0) v *= input[c.control];
    out[j] = v;
  }
}

std::string FeatureLibrary::term_name(int j, const std::vector<std::string>& state_names,
                                      const std::vector<std::string>& control_names) const {
  auto sname = [&](int i) {
    return i < static_cast<int>(state_names.size()) ? state_names[i] : "x" + std::to_string(i);
  };
  auto cname = [&](int i) {
    return i < static_cast<int>(control_names.size()) ? control_names[i] : "u" + std::to_string(i);
  };
  const Term& t = terms_.at(j);
  std::ostringstream os;
  switch (t.kind) {
    case TermKind::kConstant:
      os << "1";
      break;
    case TermKind::kMonomial: {
      bool first = true;
      for (int i = 0; i < state_dim_; ++i) {
        if (t.exponents[i] == 0) continue;
        if (!first) os << ' ';
        os << sname(i);
        if (t.exponents[i] > 1) os << '^' << t.exponents[i];
        first = false;
      }
      break;
    }
    case TermKind::kSin:
      os << "sin(" << sname(t.input) << ')';
      break;
    case TermKind::kCos:
      os << "cos(" << sname(t.input) << ')';
      break;
  }
  if (t.control >= 0) {
    if (t.kind == TermKind::kConstant) return cname(t.control);
    os << ' ' << cname(t.control);
  }
  return os.str();
}

bool FeatureLibrary::operator==(const FeatureLibrary& other) const {
  return structure_ == other.structure_ && state_dim_ == other.state_dim_ &&
         control_dim_ == other.control_dim_ && terms_ == other.terms_;
}

MatrixXd evaluate_features(const FeatureLibrary& lib, const MatrixXd& X) {
  if (X.cols() != lib.input_dim())
    throw ShapeError("evaluate_features: expected " + std::to_string(lib.input_dim()) +
                     " input columns, got " + std::to_string(X.cols()));
  if (!X.allFinite()) throw NonFiniteError("evaluate_features: non-finite input");
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor Xr = X;
  RowMajor out(X.rows(), lib.size());
  for (Eigen::Index r = 0; r < X.rows(); ++r)
    lib.evaluate_row({Xr.row(r).data(), static_cast<std::size_t>(Xr.cols())},
                     {out.row(r).data(), static_cast<std::size_t>(out.cols())});
  return out;
}

VectorXd evaluate_features(const FeatureLibrary& lib, const VectorXd& x) {
  if (x.size() != lib.input_dim())
    throw ShapeError("evaluate_features: expected input of size " +
                     std::to_string(lib.input_dim()) + ", got " + std::to_string(x.size()));
  if (!x.allFinite()) throw NonFiniteError("evaluate_features: non-finite input");
  VectorXd out(lib.size());
  lib.evaluate_row({x.data(), static_cast<std::size_t>(x.size())},
                   {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

}  // namespace sindyrl
