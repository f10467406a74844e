#include "sindyrl/profiles.hpp"

#include "sindyrl/swingup.hpp"
#include "sindyrl/wake_oscillator.hpp"

namespace sindyrl {

EnvProfile swingup_profile(int horizon) {
  EnvProfile p;
  p.name = "swingup";
  CartPoleParams params;
  params.horizon = horizon;
  p.make_env = [params] { return std::make_unique<SwingUp>(params); };
  VectorXd half(5);
  half << 5.0, 1.1, 1.1, 10.0, 10.0;
  p.surrogate_bounds = StateBounds::symmetric(half);
  p.circle = std::make_pair(1, 2);
  p.analytic_reward = [](const VectorXd& next, const VectorXd& u) { return swingup_reward(next, u(0)); };
  p.init_sampler = [params](std::uint64_t seed) { return swingup_initial_observation(seed, params); };
  return p;
}

EnvProfile wake_profile(int horizon) {
  EnvProfile p;
  p.name = "wake";
  WakeParams params;
  params.horizon = horizon;
  p.make_env = [params] { return std::make_unique<WakeOscillator>(params); };
  VectorXd half(2);
  half << 2.0, 5.0;
  p.surrogate_bounds = StateBounds::symmetric(half);
  p.replay_init = true;
  p.replay_noise = 0.0;
  return p;
}

EnvProfile make_profile(const std::string& env_name, int horizon) {
  if (env_name == "swingup") return swingup_profile(horizon);
  if (env_name == "wake") return wake_profile(horizon);
  throw std::invalid_argument("unknown environment '" + env_name + "' (expected swingup|wake)");
}

}  // namespace sindyrl
