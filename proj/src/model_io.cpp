#include "sindyrl/model_io.hpp"

#include <fstream>

namespace sindyrl {

namespace {

constexpr const char* kEnsembleFormat = "sindyrl.ensemble/1";

const char* kind_name(TermKind k) {
  switch (k) {
    case TermKind::kConstant: return "constant";
    case TermKind::kMonomial: return "monomial";
    case TermKind::kSin: return "sin";
    case TermKind::kCos: return "cos";
  }
  return "constant";
}

TermKind kind_from_name(const std::string& s) {
  if (s == "constant") return TermKind::kConstant;
  if (s == "monomial") return TermKind::kMonomial;
  if (s == "sin") return TermKind::kSin;
  if (s == "cos") return TermKind::kCos;
  throw std::invalid_argument("unknown term kind '" + s + "'");
}

}  // namespace

json library_to_json(const FeatureLibrary& lib) {
  json terms = json::array();
  for (const Term& t : lib.terms()) {
    json jt = {{"kind", kind_name(t.kind)}};
    if (t.kind == TermKind::kMonomial) jt["exponents"] = t.exponents;
    if (t.kind == TermKind::kSin || t.kind == TermKind::kCos) jt["input"] = t.input;
    if (t.control >= 0) jt["control"] = t.control;
    terms.push_back(std::move(jt));
  }
  return {{"structure", lib.structure() == LibraryStructure::kPlain ? "plain" : "control_affine"},
          {"state_dim", lib.state_dim()},
          {"control_dim", lib.control_dim()},
          {"terms", std::move(terms)}};
}

FeatureLibrary library_from_json(const json& j) {
  const std::string structure = j.at("structure").get<std::string>();
  LibraryStructure s;
  if (structure == "plain") s = LibraryStructure::kPlain;
  else if (structure == "control_affine") s = LibraryStructure::kControlAffine;
  else throw std::invalid_argument("unknown library structure '" + structure + "'");
  std::vector<Term> terms;
  for (const json& jt : j.at("terms")) {
    Term t;
    t.kind = kind_from_name(jt.at("kind").get<std::string>());
    if (jt.contains("exponents")) t.exponents = jt.at("exponents").get<std::vector<int>>();
    if (jt.contains("input")) t.input = jt.at("input").get<int>();
    if (jt.contains("control")) t.control = jt.at("control").get<int>();
    terms.push_back(std::move(t));
  }
  return FeatureLibrary(s, j.at("state_dim").get<int>(), j.at("control_dim").get<int>(),
                        std::move(terms));
}

json coefficients_to_json(const CoefficientMatrix& c) {
  std::vector<double> values;
  values.reserve(c.values.size());
  for (Eigen::Index i = 0; i < c.values.rows(); ++i)
    for (Eigen::Index k = 0; k < c.values.cols(); ++k) values.push_back(c.values(i, k));
  return {{"rows", c.values.rows()}, {"cols", c.values.cols()}, {"values", values}, {"mask", c.mask}};
}

CoefficientMatrix coefficients_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto values = j.at("values").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != rows * cols)
    throw ShapeError("coefficient array length does not match rows*cols");
  CoefficientMatrix c;
  c.values.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) c.values(i, k) = values[i * cols + k];
  c.mask = j.at("mask").get<std::vector<bool>>();
  return c;
}

json ensemble_to_json(const EnsembleModel& model) {
  const EnsembleConfig& m = model.fit_meta();
  json members = json::array();
  for (const auto& c : model.members()) members.push_back(coefficients_to_json(c));
  return {{"format", kEnsembleFormat},
          {"library", library_to_json(model.library())},
          {"aggregation", to_string(model.aggregation())},
          {"fit_meta",
           {{"threshold", m.threshold},
            {"alpha", m.alpha},
            {"row_bag_frac", m.row_bag_frac},
            {"lib_bag_frac", m.lib_bag_frac},
            {"max_iter", m.max_iter},
            {"seed", m.seed}}},
          {"members", std::move(members)}};
}

EnsembleModel ensemble_from_json(const json& j) {
  if (j.value("format", "") != kEnsembleFormat)
    throw std::invalid_argument("not an ensemble checkpoint (format != sindyrl.ensemble/1)");
  std::vector<CoefficientMatrix> members;
  for (const json& jm : j.at("members")) members.push_back(coefficients_from_json(jm));
  EnsembleConfig meta;
  const json& jm = j.at("fit_meta");
  meta.threshold = jm.at("threshold").get<double>();
  meta.alpha = jm.at("alpha").get<double>();
  meta.row_bag_frac = jm.at("row_bag_frac").get<double>();
  meta.lib_bag_frac = jm.at("lib_bag_frac").get<double>();
  meta.max_iter = jm.at("max_iter").get<int>();
  meta.seed = jm.at("seed").get<std::uint64_t>();
  return EnsembleModel(library_from_json(j.at("library")), std::move(members),
                       aggregation_from_string(j.at("aggregation").get<std::string>()), meta);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return json::parse(in);
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void save_ensemble(const EnsembleModel& model, const std::filesystem::path& path) {
  write_json_file(ensemble_to_json(model), path);
}

EnsembleModel load_ensemble(const std::filesystem::path& path) {
  return ensemble_from_json(read_json_file(path));
}

}  // namespace sindyrl
