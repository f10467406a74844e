#pragma once

#include "sindyrl/dyna.hpp"

#include <numbers>

namespace sindyrl {

enum class SamplingKind {
  kAmbientMesh,
  kProjectedMesh,
  kSurrogateTrajectories,
  kSurrogateTrajectoriesNoise,
  kReplay,
  kReplayNoise,
};

std::string to_string(SamplingKind k);
SamplingKind sampling_kind_from_string(const std::string& s);

struct MeshAxis {
  double lo = 0.0;
  double hi = 0.0;
  int points = 2;
};

/// How the query states X for distillation are gathered.
///
/// Noisy kinds emit two independently perturbed copies (N(0, noise^2) per
/// component) of every base state, so they return 2 * n_samples states.
struct SamplingStrategy {
  SamplingKind kind = SamplingKind::kSurrogateTrajectoriesNoise;
  int trajectory_length = 500;
  double noise = 0.1;
  int n_samples = 5000;
  /// Mesh kinds: one axis per state dimension. Empty means derive bounds from
  /// the store with `mesh_points` per axis.
  std::vector<MeshAxis> mesh;
  int mesh_points = 5;
  /// Trajectory kinds: initial states.
  InitialStateSampler init_sampler;
  /// (cos, sin) pair re-embedded on the circle for projected meshes and
  /// renormalized during surrogate rollouts.
  std::optional<std::pair<int, int>> circle;
  std::uint64_t seed = 0;
};

/// Swing-up initial conditions for trajectory sampling: theta ~ N(theta_mean,
/// theta_std), x, x_dot, theta_dot ~ N(0, other_std), embedded as
/// (x, cos, sin, x_dot, theta_dot). theta = 0 is upright; the default centers
/// theta on the hanging rest state the environment resets to.
struct SwingUpInit {
  double theta_mean = std::numbers::pi;
  double theta_std = 0.1;
  double other_std = 0.25;
};
InitialStateSampler swingup_distill_sampler(SwingUpInit init = {});

/// Returns the query states as rows. Trajectory kinds roll `surrogate` under
/// the clipped teacher mean; trajectories that leave the bounding box are cut
/// and a new one is started.
MatrixXd sample_states(const SamplingStrategy& strategy, const SurrogateEnv* surrogate,
                       const PolicyFn& teacher_mean, const DataStore* store);

struct DistillConfig {
  PolynomialSpec library{3, true, true, {}};
  std::vector<double> thresholds = {1e-3, 1e-2, 5e-2, 1e-1};
  std::vector<double> alphas = {1e-6, 1e-4, 1e-2};
  int n_members = 20;
  double row_bag_frac = 1.0;
  double lib_bag_frac = 0.98;
  double label_clip = 5.0;
  double validation_frac = 0.2;
  std::uint64_t seed = 0;
};

struct SweepCellReport {
  double threshold = 0.0;
  double alpha = 0.0;
  double validation_mse = 0.0;
  int nonzero = 0;
};

struct DistillResult {
  EnsembleModel policy;  // mean-aggregated
  std::vector<SweepCellReport> report;
  std::size_t selected = 0;
};

/// Labels U = clip(teacher_mean(x), -label_clip, label_clip), 80/20 split, one
/// ensemble per (threshold, alpha) cell, keeps the lowest validation MSE.
DistillResult distill_policy(const PolicyFn& teacher_mean, const MatrixXd& states, const DistillConfig& config);

/// Controller from a distilled model with actions clipped to `bounds`.
PolicyFn dictionary_policy(std::shared_ptr<const EnsembleModel> model, ActionBounds bounds);

struct PolicyComparison {
  std::vector<double> teacher_returns;
  std::vector<double> student_returns;
  double teacher_median = 0.0;
  double student_median = 0.0;
};

/// Runs both controllers from the same n_episodes initial conditions.
PolicyComparison compare_policies(Environment& env, const PolicyFn& teacher, const PolicyFn& student,
                                  int n_episodes, std::uint64_t seed);

double median(std::vector<double> v);

}  // namespace sindyrl
