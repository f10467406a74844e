#pragma once

#include "sindyrl/ensemble.hpp"
#include "sindyrl/environment.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <utility>

namespace sindyrl {

/// Axis-aligned box; both ends finite.
struct StateBounds {
  VectorXd low;
  VectorXd high;

  static StateBounds symmetric(const VectorXd& half_width);
  bool contains(const VectorXd& x) const;
};

using RewardFunction = std::function<double(const VectorXd& next_state, const VectorXd& action)>;
using InitialStateSampler = std::function<VectorXd(std::uint64_t seed)>;

/// Independent Gaussian per dimension.
InitialStateSampler gaussian_sampler(VectorXd mean, VectorXd stddev);
/// Uniform draw from stored states, optionally perturbed by N(0, noise^2).
InitialStateSampler replay_sampler(std::vector<VectorXd> states, double noise = 0.0);

struct SurrogateSpec {
  std::shared_ptr<const EnsembleModel> dynamics;
  /// Learned reward on (next_state, action); takes precedence over reward_fn.
  std::shared_ptr<const EnsembleModel> reward_model;
  RewardFunction reward_fn;
  StateBounds bounds;
  ActionBounds action_bounds;
  InitialStateSampler init_sampler;
  int horizon = 1000;
  /// Indices of a (cos, sin) pair renormalized onto the unit circle after each step.
  std::optional<std::pair<int, int>> circle;
  std::vector<std::string> names;
};

/// Learned discrete-time environment x' = Theta(x, u) Xi*.
///
/// Episodes end when the next state leaves the bounding box or the horizon is
/// reached. The terminal out-of-bounds step still gets the reward evaluated at
/// the out-of-bounds state.
class SurrogateEnv final : public Environment {
 public:
  explicit SurrogateEnv(SurrogateSpec spec);

  int observation_dim() const override { return state_dim_; }
  int action_dim() const override { return action_dim_; }
  ActionBounds action_bounds() const override { return spec_.action_bounds; }
  int horizon() const override { return spec_.horizon; }

  VectorXd reset(std::uint64_t seed) override;
  StepResult step(const VectorXd& action) override;
  std::unique_ptr<Environment> clone() const override;
  std::string name() const override { return "surrogate"; }
  std::vector<std::string> observation_names() const override;

  /// One model transition from an arbitrary state; done reflects only the
  /// bounding box. Does not touch the episode state.
  StepResult transition(const VectorXd& x, const VectorXd& action) const;

  void set_state(const VectorXd& x);
  const VectorXd& state() const { return state_; }
  const SurrogateSpec& spec() const { return spec_; }

 private:
  SurrogateSpec spec_;
  int state_dim_ = 0;
  int action_dim_ = 0;
  MatrixXd dyn_xi_t_;     // n x d, transposed aggregated coefficients
  MatrixXd reward_xi_t_;  // 1 x d_r
  VectorXd state_;
  int t_ = 0;
  mutable VectorXd input_buf_;
  mutable VectorXd feature_buf_;
  mutable VectorXd reward_feature_buf_;
};

/// Quadratic-with-bias plain library over (state, action), the default
/// reward dictionary.
FeatureLibrary default_reward_library(int state_dim, int action_dim);

/// Ensemble reward model r_k ~ Theta(x_{k+1}, u_k) Xi.
EnsembleModel fit_reward_model(const MatrixXd& next_states, const MatrixXd& actions,
                               const VectorXd& rewards, const FeatureLibrary& lib,
                               const EnsembleConfig& config);

}  // namespace sindyrl
