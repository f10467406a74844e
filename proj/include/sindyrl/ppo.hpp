#pragma once

#include "sindyrl/policy.hpp"
#include "sindyrl/rollout.hpp"

namespace sindyrl {

struct PpoConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  double vf_coef = 0.5;
  double clip = 0.2;
  double vf_clip = 0.2;
  double max_grad_norm = 0.5;
  double lr_start = 3e-4;
  double lr_end = 3e-9;
  long long anneal_updates = 1600;  // lr reaches lr_end after this many updates
  int batch_size = 4000;
  int minibatch_size = 128;
  int epochs = 4;
  double entropy_coef = 0.0;
  double adam_eps = 1e-5;
  std::vector<int> hidden = {64, 64};

  void validate() const;
};

/// One minibatch of normalized-advantage training data (columns = samples).
struct Minibatch {
  MatrixXd observations;
  MatrixXd actions;
  VectorXd old_log_probs;
  VectorXd advantages;
  VectorXd returns;
  VectorXd old_values;
};

struct PpoLoss {
  double policy_loss = 0.0;  // -mean(min(rho A, clip(rho) A))
  double value_loss = 0.0;   // 0.5 mean(max(unclipped, clipped squared error))
  double entropy = 0.0;
  double total = 0.0;        // policy + vf_coef * value - entropy_coef * entropy
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  VectorXd grad_policy;
  VectorXd grad_log_std;
  VectorXd grad_value;
};

/// Loss and exact gradients of the clipped PPO objective on a minibatch.
PpoLoss ppo_loss(const ActorCritic& ac, const Minibatch& mb, const PpoConfig& config);

struct UpdateDiagnostics {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double learning_rate = 0.0;
  int skipped_minibatches = 0;
};

/// Applies PPO updates to an actor-critic it does not own, with persistent
/// optimizer state and a linear learning-rate schedule over update count.
class PpoTrainer {
 public:
  PpoTrainer(ActorCritic& ac, PpoConfig config, std::uint64_t seed);

  /// Computes GAE, normalizes advantages over the whole batch, then runs
  /// `epochs` passes of shuffled minibatch steps. Counts as one update.
  UpdateDiagnostics update(RolloutBatch& batch);

  double learning_rate() const;
  long long updates_done() const { return updates_; }
  const PpoConfig& config() const { return config_; }

  nlohmann::json state_to_json() const;
  void restore_state(const nlohmann::json& j);

 private:
  ActorCritic* ac_;
  PpoConfig config_;
  std::mt19937_64 rng_;
  Adam adam_policy_;
  Adam adam_log_std_;
  Adam adam_value_;
  long long updates_ = 0;
};

/// Normalizes to zero mean, unit (population) standard deviation.
void normalize_advantages(VectorXd& adv);

}  // namespace sindyrl
