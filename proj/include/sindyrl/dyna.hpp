#pragma once

#include "sindyrl/ensemble.hpp"
#include "sindyrl/ppo.hpp"
#include "sindyrl/profiles.hpp"

#include <deque>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>

namespace sindyrl {

struct Transition {
  VectorXd x;
  VectorXd u;  // action as applied (clipped)
  VectorXd x_next;
  double r = 0.0;
};

/// Offline transitions plus a bounded FIFO of on-policy transitions. Refits
/// use the union of both.
class DataStore {
 public:
  explicit DataStore(std::size_t queue_capacity = 8000);

  void add_offline(Transition t);
  void push_on_policy(Transition t);

  const std::vector<Transition>& offline() const { return offline_; }
  const std::deque<Transition>& on_policy() const { return on_policy_; }
  std::size_t queue_capacity() const { return capacity_; }
  std::size_t size() const { return offline_.size() + on_policy_.size(); }

  template <typename F>
  void for_each(F&& f) const {
    for (const auto& t : offline_) f(t);
    for (const auto& t : on_policy_) f(t);
  }

  /// (x_k, u_k) -> x_{k+1}
  Dataset dynamics_dataset() const;
  /// (x_{k+1}, u_k) -> r_k
  Dataset reward_dataset() const;
  std::vector<VectorXd> states() const;

  /// CSV columns: source (offline|on_policy), x..., u..., x_next..., r
  void save_csv(const std::filesystem::path& path) const;
  static DataStore load_csv(const std::filesystem::path& path, std::size_t queue_capacity);

 private:
  std::vector<Transition> offline_;
  std::deque<Transition> on_policy_;
  std::size_t capacity_;
};

enum class OfflinePolicyKind { kUniform, kSinusoid };

/// Default policy pi_0 used to gather offline data. The sinusoid kind sweeps
/// frequency linearly across each episode.
struct OfflinePolicy {
  OfflinePolicyKind kind = OfflinePolicyKind::kUniform;
  double min_frequency = 0.1;  // cycles per step-count unit, see collect_offline
  double max_frequency = 2.0;
};

std::vector<Transition> collect_offline(Environment& env, const OfflinePolicy& policy, int n_off,
                                        std::uint64_t seed);

/// Library description resolved against concrete dimensions at fit time.
struct LibraryConfig {
  LibraryStructure structure = LibraryStructure::kControlAffine;
  PolynomialSpec f{2, false, true, {}};
  PolynomialSpec g{2, true, true, {}};

  FeatureLibrary build(int state_dim, int action_dim) const;
};

struct ModelConfig {
  LibraryConfig dynamics_library;
  EnsembleConfig dynamics_ensemble{20, 1.0, 1.0, 7e-3, 5e-5, 20, Aggregation::kMedian, 0};
  std::optional<LibraryConfig> reward_library;
  EnsembleConfig reward_ensemble{20, 1.0, 1.0, 1e-3, 1e-5, 20, Aggregation::kMedian, 0};
};

struct FittedModels {
  std::shared_ptr<const EnsembleModel> dynamics;
  std::shared_ptr<const EnsembleModel> reward;  // null when the reward is analytic
};

/// Fits dynamics (and the reward model when configured) on the whole store.
/// Ensemble seeds come from `seed`.
FittedModels refit_models(const DataStore& store, const ModelConfig& config, int state_dim,
                          int action_dim, std::uint64_t seed);

/// Surrogate built from fitted models and an environment profile.
SurrogateEnv make_surrogate(const FittedModels& models, const EnvProfile& profile,
                            const DataStore& store, const ActionBounds& action_bounds, int horizon);

struct DynaConfig {
  int n_off = 8000;
  int n_collect = 1000;
  int n_batch = 40;
  int n_refits = 40;
  std::size_t queue_capacity = 8000;
  int eval_episodes = 5;
  int eval_every = 1;
  int surrogate_horizon = 1000;
  OfflinePolicy offline_policy;
  bool reset_optimizer = false;
  /// Stop once the best evaluation return reaches this value.
  std::optional<double> stop_at_return;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RefitRecord {
  int refit = 0;
  long long gt_interactions = 0;    // N_off + k N_collect
  long long eval_interactions = 0;  // cumulative, reported separately
  long long surrogate_steps = 0;
  long long policy_updates = 0;
  double eval_return = std::numeric_limits<double>::quiet_NaN();
  double best_return = -std::numeric_limits<double>::infinity();
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double learning_rate = 0.0;
  bool refit_failed = false;
};

struct DynaResult {
  std::vector<RefitRecord> records;
  ActorCritic best_policy;
  ActorCritic final_policy;
  double best_return = -std::numeric_limits<double>::infinity();
  FittedModels models;
  DataStore store;
};

struct DynaHooks {
  /// Called after every refit with the updated record.
  std::function<void(const RefitRecord&)> on_refit;
  /// When set, per-refit checkpoints and models are written here and an
  /// existing checkpoint is resumed from.
  std::optional<std::filesystem::path> checkpoint_dir;
  /// Stop after this many refits in this invocation (simulates an interrupt).
  std::optional<int> max_refits_this_call;
};

/// Dyna-style model-based training: offline collection, fit, then n_refits
/// rounds of {n_batch PPO updates on the surrogate, N_collect ground-truth
/// steps into the on-policy queue, refit, evaluate}.
DynaResult run_dyna(const EnvProfile& profile, const DynaConfig& config, const ModelConfig& models,
                    PpoConfig ppo, const DynaHooks& hooks = {});

/// One grid cell result per (n_batch, n_collect, seed).
struct SweepRow {
  int n_batch = 0;
  int n_collect = 0;
  std::uint64_t seed = 0;
  /// Ground-truth training interactions when the best return first reached
  /// the threshold; nullopt if never.
  std::optional<long long> interactions_to_threshold;
  double best_return = 0.0;
};

struct SweepConfig {
  std::vector<int> n_batch = {5, 10, 20, 40};
  std::vector<int> n_collect = {250, 500, 1000, 2000};
  std::vector<std::uint64_t> seeds = {0};
  long long total_policy_updates = 1250;
  double threshold = 570.0;
};

std::vector<SweepRow> sweep(const EnvProfile& profile, const SweepConfig& sweep_config,
                            const DynaConfig& base, const ModelConfig& models, const PpoConfig& ppo,
                            int workers = 1);

/// Median interactions-to-threshold per cell; nullopt when the median run never reached it.
struct SweepCell {
  int n_batch = 0;
  int n_collect = 0;
  std::optional<double> median_interactions;
};
std::vector<SweepCell> summarize_sweep(const std::vector<SweepRow>& rows);

}  // namespace sindyrl
