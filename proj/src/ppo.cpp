#include "sindyrl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace sindyrl {

void PpoConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("ppo.gamma must lie in (0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("ppo.lambda must lie in [0, 1]");
  if (batch_size < 1 || minibatch_size < 1 || epochs < 1)
    throw std::invalid_argument("ppo batch, minibatch and epoch counts must be >= 1");
  if (!(clip > 0.0) || !(vf_clip > 0.0) || !(max_grad_norm > 0.0))
    throw std::invalid_argument("ppo clip parameters must be positive");
  if (anneal_updates < 1) throw std::invalid_argument("ppo.anneal_updates must be >= 1");
  if (hidden.empty()) throw std::invalid_argument("ppo.hidden needs at least one layer");
}

void normalize_advantages(VectorXd& adv) {
  if (adv.size() == 0) return;
  const double mean = adv.mean();
  adv.array() -= mean;
  const double stddev = std::sqrt(adv.squaredNorm() / static_cast<double>(adv.size()));
  adv /= stddev + 1e-8;
}

PpoLoss ppo_loss(const ActorCritic& ac, const Minibatch& mb, const PpoConfig& config) {
  const Eigen::Index B = mb.observations.cols();
  const double inv_b = 1.0 / static_cast<double>(B);
  const int ad = ac.action_dim();
  PpoLoss out;

  Mlp::Cache pcache;
  const MatrixXd mean = ac.policy.forward(mb.observations, &pcache);
  const VectorXd inv_std = (-ac.log_std).array().exp();
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);

  MatrixXd d_mean(ad, B);
  out.grad_log_std = VectorXd::Zero(ad);
  int clipped = 0;
  for (Eigen::Index i = 0; i < B; ++i) {
    double logp = 0.0;
    for (int j = 0; j < ad; ++j) {
      const double z = (mb.actions(j, i) - mean(j, i)) * inv_std(j);
      logp += -0.5 * z * z - ac.log_std(j) - half_log_2pi;
    }
    const double log_ratio = logp - mb.old_log_probs(i);
    const double ratio = std::exp(log_ratio);
    const double adv = mb.advantages(i);
    const double surr1 = ratio * adv;
    const double surr2 = std::clamp(ratio, 1.0 - config.clip, 1.0 + config.clip) * adv;
    out.policy_loss -= std::min(surr1, surr2) * inv_b;
    out.approx_kl += ((ratio - 1.0) - log_ratio) * inv_b;
    if (std::abs(ratio - 1.0) > config.clip) ++clipped;
    // d(loss)/d(logp) is -rho A / B when the unclipped branch is the minimum.
    const double d_logp = surr1 <= surr2 ? -surr1 * inv_b : 0.0;
    for (int j = 0; j < ad; ++j) {
      const double z = (mb.actions(j, i) - mean(j, i)) * inv_std(j);
      d_mean(j, i) = d_logp * z * inv_std(j);
      out.grad_log_std(j) += d_logp * (z * z - 1.0);
    }
  }
  out.clip_fraction = clipped * inv_b;
  out.entropy = ac.log_std.sum() + ad * (0.5 + half_log_2pi);
  out.grad_log_std.array() -= config.entropy_coef;
  out.grad_policy = VectorXd::Zero(ac.policy.num_params());
  ac.policy.backward(pcache, d_mean, out.grad_policy);

  Mlp::Cache vcache;
  const MatrixXd values = ac.value.forward(mb.observations, &vcache);
  MatrixXd d_value(1, B);
  for (Eigen::Index i = 0; i < B; ++i) {
    const double v = values(0, i);
    const double unclipped = (v - mb.returns(i)) * (v - mb.returns(i));
    const double v_clip = mb.old_values(i) + std::clamp(v - mb.old_values(i), -config.vf_clip, config.vf_clip);
    const double clipped_err = (v_clip - mb.returns(i)) * (v_clip - mb.returns(i));
    out.value_loss += 0.5 * std::max(unclipped, clipped_err) * inv_b;
    d_value(0, i) = unclipped >= clipped_err ? config.vf_coef * (v - mb.returns(i)) * inv_b : 0.0;
  }
  out.grad_value = VectorXd::Zero(ac.value.num_params());
  ac.value.backward(vcache, d_value, out.grad_value);

  out.total = out.policy_loss + config.vf_coef * out.value_loss - config.entropy_coef * out.entropy;
  return out;
}

PpoTrainer::PpoTrainer(ActorCritic& ac, PpoConfig config, std::uint64_t seed)
    : ac_(&ac),
      config_(std::move(config)),
      rng_(derive_seed(seed, 0x990)),
      adam_policy_(ac.policy.num_params(), 0.9, 0.999, config_.adam_eps),
      adam_log_std_(ac.log_std.size(), 0.9, 0.999, config_.adam_eps),
      adam_value_(ac.value.num_params(), 0.9, 0.999, config_.adam_eps) {
  config_.validate();
}

double PpoTrainer::learning_rate() const {
  const double frac = std::min(1.0, static_cast<double>(updates_) / static_cast<double>(config_.anneal_updates));
  return config_.lr_start + (config_.lr_end - config_.lr_start) * frac;
}

UpdateDiagnostics PpoTrainer::update(RolloutBatch& batch) {
  gae_advantages(batch, config_.gamma, config_.lambda);
  VectorXd adv = batch.advantages;
  normalize_advantages(adv);

  UpdateDiagnostics diag;
  diag.learning_rate = learning_rate();
  const Eigen::Index T = batch.size();
  std::vector<Eigen::Index> order(T);
  std::iota(order.begin(), order.end(), 0);
  int steps = 0;
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng_);
    for (Eigen::Index start = 0; start < T; start += config_.minibatch_size) {
      const Eigen::Index n = std::min<Eigen::Index>(config_.minibatch_size, T - start);
      Minibatch mb;
      mb.observations.resize(batch.observations.rows(), n);
      mb.actions.resize(batch.actions.rows(), n);
      mb.old_log_probs.resize(n);
      mb.advantages.resize(n);
      mb.returns.resize(n);
      mb.old_values.resize(n);
      for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index idx = order[start + k];
        mb.observations.col(k) = batch.observations.col(idx);
        mb.actions.col(k) = batch.actions.col(idx);
        mb.old_log_probs(k) = batch.log_probs(idx);
        mb.advantages(k) = adv(idx);
        mb.returns(k) = batch.returns(idx);
        mb.old_values(k) = batch.values(idx);
      }
      PpoLoss loss = ppo_loss(*ac_, mb, config_);
      if (!std::isfinite(loss.total) || !loss.grad_policy.allFinite() ||
          !loss.grad_value.allFinite() || !loss.grad_log_std.allFinite()) {
        ++diag.skipped_minibatches;
        continue;
      }
      const double norm = std::sqrt(loss.grad_policy.squaredNorm() + loss.grad_value.squaredNorm() +
                                    loss.grad_log_std.squaredNorm());
      if (norm > config_.max_grad_norm) {
        const double s = config_.max_grad_norm / (norm + 1e-6);
        loss.grad_policy *= s;
        loss.grad_value *= s;
        loss.grad_log_std *= s;
      }
      adam_policy_.step(ac_->policy.params(), loss.grad_policy, diag.learning_rate);
      adam_log_std_.step(ac_->log_std, loss.grad_log_std, diag.learning_rate);
      adam_value_.step(ac_->value.params(), loss.grad_value, diag.learning_rate);
      diag.policy_loss += loss.policy_loss;
      diag.value_loss += loss.value_loss;
      diag.entropy += loss.entropy;
      diag.approx_kl += loss.approx_kl;
      diag.clip_fraction += loss.clip_fraction;
      ++steps;
    }
  }
  if (steps > 0) {
    diag.policy_loss /= steps;
    diag.value_loss /= steps;
    diag.entropy /= steps;
    diag.approx_kl /= steps;
    diag.clip_fraction /= steps;
  }
  ++updates_;
  return diag;
}

namespace {

std::vector<double> to_vec(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

VectorXd from_vec(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

nlohmann::json adam_to_json(const Adam& a) {
  return {{"m", to_vec(a.first_moment())}, {"v", to_vec(a.second_moment())}, {"t", a.steps()}};
}

void adam_from_json(Adam& a, const nlohmann::json& j) {
  a.restore(from_vec(j.at("m")), from_vec(j.at("v")), j.at("t").get<long long>());
}

}  // namespace

nlohmann::json PpoTrainer::state_to_json() const {
  std::ostringstream rng_state;
  rng_state << rng_;
  return {{"updates", updates_},
          {"rng", rng_state.str()},
          {"adam_policy", adam_to_json(adam_policy_)},
          {"adam_log_std", adam_to_json(adam_log_std_)},
          {"adam_value", adam_to_json(adam_value_)}};
}

void PpoTrainer::restore_state(const nlohmann::json& j) {
  updates_ = j.at("updates").get<long long>();
  std::istringstream rng_state(j.at("rng").get<std::string>());
  rng_state >> rng_;
  adam_from_json(adam_policy_, j.at("adam_policy"));
  adam_from_json(adam_log_std_, j.at("adam_log_std"));
  adam_from_json(adam_value_, j.at("adam_value"));
}

}  // namespace sindyrl
