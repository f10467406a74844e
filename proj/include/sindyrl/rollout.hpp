#pragma once

#include "sindyrl/environment.hpp"
#include "sindyrl/policy.hpp"

#include <memory>
#include <vector>

namespace sindyrl {

/// Transitions stored column-wise (one column per step).
struct RolloutBatch {
  MatrixXd observations;       // obs_dim x T
  MatrixXd actions;            // action_dim x T, unclipped samples
  MatrixXd next_observations;  // obs_dim x T, what the env returned
  VectorXd log_probs;
  VectorXd rewards;
  VectorXd values;
  VectorXd dones;              // 1.0 where the episode ended on this step
  double bootstrap_value = 0.0;  // V(x_T) for the step after the batch
  VectorXd advantages;
  VectorXd returns;
  std::vector<double> completed_episode_returns;

  Eigen::Index size() const { return rewards.size(); }
};

/// Owns an environment instance and keeps episodes running across calls,
/// auto-resetting with seeds derived from the collector's base seed.
class RolloutCollector {
 public:
  RolloutCollector(std::unique_ptr<Environment> env, std::uint64_t seed);

  RolloutBatch collect(const ActorCritic& ac, int n_steps);

  Environment& env() { return *env_; }
  long long total_steps() const { return total_steps_; }
  long long episodes_started() const { return episode_index_; }

 private:
  void start_episode();

  std::unique_ptr<Environment> env_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  VectorXd obs_;
  double running_return_ = 0.0;
  long long episode_index_ = 0;
  long long total_steps_ = 0;
};

/// Fills advantages/returns: A_t = sum_k (gamma lambda)^k delta_{t+k},
/// delta_t = r_t + gamma V(x_{t+1}) (1 - done_t) - V(x_t), returns = A + V.
void gae_advantages(RolloutBatch& batch, double gamma, double lambda);

struct EvalResult {
  std::vector<double> returns;
  double mean = 0.0;
  long long steps = 0;
};

/// Deterministic rollouts of `policy` for n_episodes full episodes; episode i
/// resets with derive_seed(seed, kEvalStream, i).
EvalResult evaluate(Environment& env, const PolicyFn& policy, int n_episodes, std::uint64_t seed);

inline constexpr std::uint64_t kEvalStream = 0xE7A1;

}  // namespace sindyrl
