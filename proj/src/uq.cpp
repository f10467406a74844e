#include "sindyrl/uq.hpp"

#include "sindyrl/model_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

namespace sindyrl {

double LandscapeAxis::at(int i) const {
  if (points == 1) return lo;
  return lo + (hi - lo) * i / static_cast<double>(points - 1);
}

void validate_landscape_spec(const EnsembleModel& model, const LandscapeSpec& spec) {
  if (model.n_members() < 2) throw std::invalid_argument("variance landscape needs at least two members");
  if (static_cast<int>(spec.inputs.size()) != model.input_dim())
    throw std::invalid_argument("variance landscape: " + std::to_string(spec.inputs.size()) +
                                " inputs assigned but the model takes " + std::to_string(model.input_dim()) +
                                "; every input must be fixed or meshed");
  if (spec.axes.empty()) throw std::invalid_argument("variance landscape: no mesh axes");
  std::vector<bool> used(spec.axes.size(), false);
  for (std::size_t i = 0; i < spec.inputs.size(); ++i) {
    const auto& s = spec.inputs[i];
    if (s.kind == InputSource::Kind::kFixed) {
      if (!std::isfinite(s.value)) throw std::invalid_argument("variance landscape: non-finite fixed value");
      continue;
    }
    if (s.axis < 0 || s.axis >= static_cast<int>(spec.axes.size()))
      throw std::invalid_argument("variance landscape: input " + std::to_string(i) + " refers to a missing axis");
    used[s.axis] = true;
  }
  for (std::size_t a = 0; a < spec.axes.size(); ++a) {
    if (!used[a]) throw std::invalid_argument("variance landscape: axis '" + spec.axes[a].name + "' feeds no input");
    if (spec.axes[a].points < 1) throw std::invalid_argument("variance landscape: axis needs >= 1 point");
  }
}

VectorXd assemble_input(const LandscapeSpec& spec, const std::vector<double>& coords) {
  VectorXd x(static_cast<Eigen::Index>(spec.inputs.size()));
  for (std::size_t i = 0; i < spec.inputs.size(); ++i) {
    const auto& s = spec.inputs[i];
    const auto k = static_cast<Eigen::Index>(i);
    switch (s.kind) {
      case InputSource::Kind::kFixed: x(k) = s.value; break;
      case InputSource::Kind::kAxis: x(k) = coords[s.axis]; break;
      case InputSource::Kind::kCos: x(k) = std::cos(coords[s.axis]); break;
      case InputSource::Kind::kSin: x(k) = std::sin(coords[s.axis]); break;
    }
  }
  return x;
}

Landscape variance_landscape(const EnsembleModel& model, const LandscapeSpec& spec) {
  validate_landscape_spec(model, spec);
  Landscape out;
  out.spec = spec;
  std::size_t total = 1;
  for (const auto& a : spec.axes) total *= static_cast<std::size_t>(a.points);
  out.coordinates.reserve(total);
  out.variance.reserve(total);

  const VarianceEvaluator var(model);
  std::vector<int> idx(spec.axes.size(), 0);
  std::vector<double> coords(spec.axes.size());
  for (std::size_t n = 0; n < total; ++n) {
    for (std::size_t a = 0; a < spec.axes.size(); ++a) coords[a] = spec.axes[a].at(idx[a]);
    out.coordinates.push_back(coords);
    out.variance.push_back(var(assemble_input(spec, coords)));
    for (int a = static_cast<int>(spec.axes.size()) - 1; a >= 0; --a) {
      if (++idx[a] < spec.axes[a].points) break;
      idx[a] = 0;
    }
  }
  return out;
}

LandscapeSpec swingup_dynamics_slice(int points, double theta_dot_max) {
  LandscapeSpec s;
  s.axes = {{"theta", -std::numbers::pi, std::numbers::pi, points},
            {"theta_dot", -theta_dot_max, theta_dot_max, points}};
  // (x, cos, sin, x_dot, theta_dot, u)
  s.inputs = {InputSource::fixed(0.0), InputSource::cos_of(0), InputSource::sin_of(0),
              InputSource::fixed(0.0), InputSource::from_axis(1), InputSource::fixed(0.0)};
  return s;
}

namespace {
const char* kind_name(InputSource::Kind k) {
  switch (k) {
    case InputSource::Kind::kFixed: return "fixed";
    case InputSource::Kind::kAxis: return "axis";
    case InputSource::Kind::kCos: return "cos";
    case InputSource::Kind::kSin: return "sin";
  }
  return "";
}
}  // namespace

nlohmann::json landscape_spec_to_json(const LandscapeSpec& s) {
  json j;
  j["axes"] = json::array();
  for (const auto& a : s.axes) j["axes"].push_back({{"name", a.name}, {"lo", a.lo}, {"hi", a.hi}, {"points", a.points}});
  j["inputs"] = json::array();
  for (const auto& in : s.inputs) {
    if (in.kind == InputSource::Kind::kFixed)
      j["inputs"].push_back({{"source", "fixed"}, {"value", in.value}});
    else
      j["inputs"].push_back({{"source", kind_name(in.kind)}, {"axis", in.axis}});
  }
  return j;
}

LandscapeSpec landscape_spec_from_json(const nlohmann::json& j) {
  LandscapeSpec s;
  for (const auto& a : j.at("axes"))
    s.axes.push_back({a.at("name").get<std::string>(), a.at("lo").get<double>(), a.at("hi").get<double>(),
                      a.at("points").get<int>()});
  for (const auto& in : j.at("inputs")) {
    const auto src = in.at("source").get<std::string>();
    if (src == "fixed") s.inputs.push_back(InputSource::fixed(in.at("value").get<double>()));
    else if (src == "axis") s.inputs.push_back(InputSource::from_axis(in.at("axis").get<int>()));
    else if (src == "cos") s.inputs.push_back(InputSource::cos_of(in.at("axis").get<int>()));
    else if (src == "sin") s.inputs.push_back(InputSource::sin_of(in.at("axis").get<int>()));
    else throw std::invalid_argument("unknown input source '" + src + "'");
  }
  return s;
}

nlohmann::json landscape_header(const Landscape& l) {
  json j = landscape_spec_to_json(l.spec);
  j["format"] = "sindyrl.landscape/1";
  j["order"] = "row-major, last axis fastest";
  j["nodes"] = l.variance.size();
  return j;
}

void write_landscape(const Landscape& l, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot write " + csv_path.string());
  for (const auto& a : l.spec.axes) out << a.name << ',';
  out << "variance\n";
  out << std::setprecision(17);
  for (std::size_t n = 0; n < l.variance.size(); ++n) {
    for (double c : l.coordinates[n]) out << c << ',';
    out << l.variance[n] << '\n';
  }
  auto header_path = csv_path;
  header_path.replace_extension(".json");
  write_json_file(landscape_header(l), header_path);
}

}  // namespace sindyrl
