#pragma once

#include "sindyrl/ensemble.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace sindyrl {

struct LandscapeAxis {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  int points = 10;

  double at(int i) const;
};

/// Where one model input comes from: a fixed value, a mesh axis, or the
/// cos/sin of a mesh axis (for angles embedded on the circle).
struct InputSource {
  enum class Kind { kFixed, kAxis, kCos, kSin };
  Kind kind = Kind::kFixed;
  double value = 0.0;
  int axis = 0;

  static InputSource fixed(double v) { return {Kind::kFixed, v, 0}; }
  static InputSource from_axis(int a) { return {Kind::kAxis, 0.0, a}; }
  static InputSource cos_of(int a) { return {Kind::kCos, 0.0, a}; }
  static InputSource sin_of(int a) { return {Kind::kSin, 0.0, a}; }
};

struct LandscapeSpec {
  std::vector<LandscapeAxis> axes;
  /// One entry per model input.
  std::vector<InputSource> inputs;
};

/// Variances on the mesh, flattened row-major: the last axis varies fastest,
/// so node (i0, ..., i_{m-1}) sits at sum_j i_j * prod_{l>j} points_l.
struct Landscape {
  LandscapeSpec spec;
  std::vector<std::vector<double>> coordinates;  // per node, one value per axis
  std::vector<double> variance;
};

/// Rejects specs where an input is unassigned, an axis is unused or out of
/// range, or the model has fewer than two members.
void validate_landscape_spec(const EnsembleModel& model, const LandscapeSpec& spec);

VectorXd assemble_input(const LandscapeSpec& spec, const std::vector<double>& coords);

Landscape variance_landscape(const EnsembleModel& model, const LandscapeSpec& spec);

/// Swing-up dynamics slice: (theta, theta_dot) meshed, x = x_dot = u = 0.
LandscapeSpec swingup_dynamics_slice(int points = 50, double theta_dot_max = 10.0);

/// CSV (axis names..., variance) and a JSON sidecar with axes and slice.
void write_landscape(const Landscape& l, const std::filesystem::path& csv_path);
nlohmann::json landscape_header(const Landscape& l);

nlohmann::json landscape_spec_to_json(const LandscapeSpec& s);
LandscapeSpec landscape_spec_from_json(const nlohmann::json& j);

}  // namespace sindyrl
