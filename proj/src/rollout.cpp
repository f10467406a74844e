#include "sindyrl/rollout.hpp"

#include <numeric>

namespace sindyrl {

namespace {
constexpr std::uint64_t kEpisodeStream = 0x5EED;
}

RolloutCollector::RolloutCollector(std::unique_ptr<Environment> env, std::uint64_t seed)
    : env_(std::move(env)), seed_(seed), rng_(derive_seed(seed, 0xAC7)) {
  if (!env_) throw std::invalid_argument("rollout collector needs an environment");
  start_episode();
}

void RolloutCollector::start_episode() {
  obs_ = env_->reset(derive_seed(seed_, kEpisodeStream, static_cast<std::uint64_t>(episode_index_)));
  ++episode_index_;
  running_return_ = 0.0;
}

RolloutBatch RolloutCollector::collect(const ActorCritic& ac, int n_steps) {
  if (n_steps < 1) throw std::invalid_argument("collect_rollouts: n_steps must be >= 1");
  const int od = env_->observation_dim();
  const int ad = env_->action_dim();
  RolloutBatch b;
  b.observations.resize(od, n_steps);
  b.next_observations.resize(od, n_steps);
  b.actions.resize(ad, n_steps);
  b.log_probs.resize(n_steps);
  b.rewards.resize(n_steps);
  b.values.resize(n_steps);
  b.dones.resize(n_steps);
  for (int t = 0; t < n_steps; ++t) {
    b.observations.col(t) = obs_;
    const VectorXd mean = ac.mean_action(obs_);
    VectorXd u = mean;
    std::normal_distribution<double> n01(0.0, 1.0);
    for (int j = 0; j < ad; ++j) u(j) += std::exp(ac.log_std(j)) * n01(rng_);
    b.actions.col(t) = u;
    b.log_probs(t) = gaussian_log_prob(u, mean, ac.log_std);
    b.values(t) = ac.state_value(obs_);
    StepResult r = env_->step(ac.bounds.clip(u));
    b.rewards(t) = r.reward;
    b.dones(t) = r.done ? 1.0 : 0.0;
    b.next_observations.col(t) = r.observation;
    running_return_ += r.reward;
    ++total_steps_;
    if (r.done) {
      b.completed_episode_returns.push_back(running_return_);
      start_episode();
    } else {
      obs_ = std::move(r.observation);
    }
  }
  b.bootstrap_value = ac.state_value(obs_);
  return b;
}

void gae_advantages(RolloutBatch& batch, double gamma, double lambda) {
  const Eigen::Index T = batch.size();
  batch.advantages.resize(T);
  double next_adv = 0.0;
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const double not_done = 1.0 - batch.dones(t);
    const double next_value = t + 1 < T ? batch.values(t + 1) : batch.bootstrap_value;
    const double delta = batch.rewards(t) + gamma * next_value * not_done - batch.values(t);
    next_adv = delta + gamma * lambda * not_done * next_adv;
    batch.advantages(t) = next_adv;
  }
  batch.returns = batch.advantages + batch.values;
}

EvalResult evaluate(Environment& env, const PolicyFn& policy, int n_episodes, std::uint64_t seed) {
  if (n_episodes < 1) throw std::invalid_argument("evaluate: n_episodes must be >= 1");
  EvalResult out;
  for (int i = 0; i < n_episodes; ++i) {
    VectorXd obs = env.reset(derive_seed(seed, kEvalStream, static_cast<std::uint64_t>(i)));
    double total = 0.0;
    while (true) {
      StepResult r = env.step(policy(obs));
      total += r.reward;
      ++out.steps;
      if (r.done) break;
      obs = std::move(r.observation);
    }
    out.returns.push_back(total);
  }
  out.mean = std::accumulate(out.returns.begin(), out.returns.end(), 0.0) / n_episodes;
  return out;
}

}  // namespace sindyrl
