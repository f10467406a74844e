#pragma once

#include "sindyrl/distill.hpp"
#include "sindyrl/dyna.hpp"
#include "sindyrl/uq.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace sindyrl {

/// Invalid experiment document. `path()` names the offending field, e.g.
/// "dyna.n_batch".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct DistillSection {
  SamplingKind sampling = SamplingKind::kSurrogateTrajectoriesNoise;
  int trajectory_length = 500;
  double noise = 0.1;
  int n_samples = 5000;
  int mesh_points = 5;
  SwingUpInit swingup_init;  // trajectory initial conditions (swing-up only)
  DistillConfig fit;
  int compare_episodes = 15;
};

struct UqSection {
  int points = 50;
  std::optional<LandscapeSpec> landscape;  // empty: environment default slice
};

/// One run, fully described. Everything random derives from `seed`.
struct ExperimentConfig {
  std::string env;
  int horizon = 1000;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds;  // sweep / multi-seed runs; empty means {seed}
  int workers = 1;
  std::string output_dir = "runs";
  DynaConfig dyna;
  ModelConfig models;
  PpoConfig ppo;
  DistillSection distill;
  UqSection uq;
  SweepConfig sweep;
};

/// Strict parse: unknown keys and wrong types throw ConfigError with a path.
/// `env.name` is the only required field; everything else has a default,
/// some of which depend on the environment.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every field with its resolved value; parse_config(to_json(c)) == c.
nlohmann::json config_to_json(const ExperimentConfig& c);

EnvProfile make_profile(const ExperimentConfig& c);

}  // namespace sindyrl
