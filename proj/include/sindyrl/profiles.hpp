#pragma once

#include "sindyrl/surrogate_env.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace sindyrl {

/// How a ground-truth environment is wrapped by the model-based loop.
struct EnvProfile {
  std::string name;
  std::function<std::unique_ptr<Environment>()> make_env;
  StateBounds surrogate_bounds;
  std::optional<std::pair<int, int>> circle;
  /// Known reward on (next_state, action). Empty means the reward is learned.
  RewardFunction analytic_reward;
  /// Surrogate episodes start from this sampler unless replay_init is set.
  InitialStateSampler init_sampler;
  bool replay_init = false;
  double replay_noise = 0.0;
};

/// Swing-up: |x| <= 5, |cos|,|sin| <= 1.1, |x_dot|,|theta_dot| <= 10, circle
/// renormalization on (cos, sin), analytic reward, ground-truth reset sampler.
EnvProfile swingup_profile(int horizon = 1000);

/// Wake oscillator: learned reward, surrogate episodes seeded from stored states.
EnvProfile wake_profile(int horizon = 1000);

EnvProfile make_profile(const std::string& env_name, int horizon);

}  // namespace sindyrl
