#pragma once

#include "sindyrl/environment.hpp"
#include "sindyrl/mlp.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <random>

namespace sindyrl {

/// splitmix64 mixing of (base, stream, index). Every random consumer in the
/// pipeline gets its own stream id so adding a consumer never shifts another.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0);

/// Gaussian policy with a state-independent learned log-std, plus a separate
/// value network of the same hidden architecture.
struct ActorCritic {
  Mlp policy;
  VectorXd log_std;
  Mlp value;
  ActionBounds bounds;

  static ActorCritic create(int obs_dim, int action_dim, ActionBounds bounds,
                            std::vector<int> hidden, std::uint64_t seed);

  int observation_dim() const { return policy.input_dim(); }
  int action_dim() const { return policy.output_dim(); }

  VectorXd mean_action(const VectorXd& x) const { return policy.forward(x); }
  double state_value(const VectorXd& x) const { return value.forward(x)(0); }
  double log_prob(const VectorXd& x, const VectorXd& u) const;
  /// Draws u ~ N(mean(x), exp(log_std)^2); not clipped.
  VectorXd sample(const VectorXd& x, std::mt19937_64& rng) const;
};

/// Log-density of a diagonal Gaussian.
double gaussian_log_prob(const VectorXd& u, const VectorXd& mean, const VectorXd& log_std);

/// policy_mean: deterministic pre-clipping forward pass of the mean network.
inline VectorXd policy_mean(const ActorCritic& ac, const VectorXd& x) { return ac.mean_action(x); }

/// Any deterministic controller x -> u (network mean, distilled dictionary, ...).
using PolicyFn = std::function<VectorXd(const VectorXd&)>;

/// Mean action clipped to the policy's action bounds.
PolicyFn deterministic_policy(const ActorCritic& ac);

nlohmann::json mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& j);

/// {"format": "sindyrl.policy/1", "policy": {...}, "value": {...}, "log_std": [...],
///  "action_low": [...], "action_high": [...], "activation": "tanh"}
nlohmann::json actor_critic_to_json(const ActorCritic& ac);
ActorCritic actor_critic_from_json(const nlohmann::json& j);

}  // namespace sindyrl
