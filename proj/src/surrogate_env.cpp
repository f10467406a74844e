#include "sindyrl/surrogate_env.hpp"

#include <cmath>
#include <random>

namespace sindyrl {

StateBounds StateBounds::symmetric(const VectorXd& half_width) { return {-half_width, half_width}; }

bool StateBounds::contains(const VectorXd& x) const {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!(x(i) >= low(i) && x(i) <= high(i))) return false;
  return true;
}

InitialStateSampler gaussian_sampler(VectorXd mean, VectorXd stddev) {
  if (mean.size() != stddev.size()) throw ShapeError("gaussian_sampler: mean/stddev size mismatch");
  return [mean = std::move(mean), stddev = std::move(stddev)](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    VectorXd x(mean.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = mean(i) + stddev(i) * n01(rng);
    return x;
  };
}

InitialStateSampler replay_sampler(std::vector<VectorXd> states, double noise) {
  if (states.empty()) throw std::invalid_argument("replay_sampler: no states");
  return [states = std::move(states), noise](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, states.size() - 1);
    VectorXd x = states[pick(rng)];
    if (noise > 0.0) {
      std::normal_distribution<double> n(0.0, noise);
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += n(rng);
    }
    return x;
  };
}

SurrogateEnv::SurrogateEnv(SurrogateSpec spec) : spec_(std::move(spec)) {
  if (!spec_.dynamics) throw std::invalid_argument("surrogate: dynamics model required");
  const EnsembleModel& dyn = *spec_.dynamics;
  state_dim_ = dyn.output_dim();
  action_dim_ = dyn.input_dim() - state_dim_;
  if (action_dim_ < 1) throw ShapeError("surrogate: dynamics input must be (state, action)");
  if (spec_.bounds.low.size() != state_dim_ || spec_.bounds.high.size() != state_dim_)
    throw ShapeError("surrogate: bounds do not match state dimension");
  if (!spec_.bounds.low.allFinite() || !spec_.bounds.high.allFinite())
    throw std::invalid_argument("surrogate: bounds must be finite");
  if (spec_.action_bounds.low.size() != action_dim_)
    throw ShapeError("surrogate: action bounds do not match action dimension");
  if (spec_.reward_model) {
    if (spec_.reward_model->input_dim() != state_dim_ + action_dim_ ||
        spec_.reward_model->output_dim() != 1)
      throw ShapeError("surrogate: reward model must map (state, action) to a scalar");
    reward_xi_t_ = spec_.reward_model->aggregated().values.transpose();
    reward_feature_buf_.resize(spec_.reward_model->library().size());
  } else if (!spec_.reward_fn) {
    throw std::invalid_argument("surrogate: reward model or reward function required");
  }
  if (!spec_.init_sampler) throw std::invalid_argument("surrogate: initial-state sampler required");
  if (spec_.horizon < 1) throw std::invalid_argument("surrogate: horizon must be >= 1");
  dyn_xi_t_ = dyn.aggregated().values.transpose();
  input_buf_.resize(state_dim_ + action_dim_);
  feature_buf_.resize(dyn.library().size());
  state_ = VectorXd::Zero(state_dim_);
}

StepResult SurrogateEnv::transition(const VectorXd& x, const VectorXd& action) const {
  if (x.size() != state_dim_ || action.size() != action_dim_)
    throw ShapeError("surrogate: state or action has the wrong size");
  const VectorXd u = spec_.action_bounds.clip(action);
  input_buf_.head(state_dim_) = x;
  input_buf_.tail(action_dim_) = u;
  const std::span<const double> in{input_buf_.data(), static_cast<std::size_t>(input_buf_.size())};
  spec_.dynamics->library().evaluate_row(in, {feature_buf_.data(), static_cast<std::size_t>(feature_buf_.size())});

  StepResult r;
  r.observation = dyn_xi_t_ * feature_buf_;
  if (spec_.circle) {
    const auto [ic, is] = *spec_.circle;
    const double norm = std::hypot(r.observation(ic), r.observation(is));
    if (norm > 0.0 && std::isfinite(norm)) {
      r.observation(ic) /= norm;
      r.observation(is) /= norm;
    }
  }
  const bool finite = r.observation.allFinite();
  if (spec_.reward_model) {
    if (finite) {
      input_buf_.head(state_dim_) = r.observation;
      spec_.reward_model->library().evaluate_row(
          in, {reward_feature_buf_.data(), static_cast<std::size_t>(reward_feature_buf_.size())});
      r.reward = reward_xi_t_.row(0).dot(reward_feature_buf_);
    }
  } else if (finite) {
    r.reward = spec_.reward_fn(r.observation, u);
  }
  r.done = !finite || !spec_.bounds.contains(r.observation);
  if (!finite) {
    r.observation = x;
    r.reward = 0.0;
  }
  return r;
}

VectorXd SurrogateEnv::reset(std::uint64_t seed) {
  state_ = spec_.init_sampler(seed);
  if (state_.size() != state_dim_) throw ShapeError("surrogate: sampler returned wrong state size");
  t_ = 0;
  return state_;
}

void SurrogateEnv::set_state(const VectorXd& x) {
  if (x.size() != state_dim_) throw ShapeError("surrogate: state has the wrong size");
  state_ = x;
  t_ = 0;
}

StepResult SurrogateEnv::step(const VectorXd& action) {
  StepResult r = transition(state_, action);
  ++t_;
  state_ = r.observation;
  r.done = r.done || t_ >= spec_.horizon;
  return r;
}

std::unique_ptr<Environment> SurrogateEnv::clone() const {
  return std::make_unique<SurrogateEnv>(*this);
}

std::vector<std::string> SurrogateEnv::observation_names() const {
  if (static_cast<int>(spec_.names.size()) == state_dim_) return spec_.names;
  std::vector<std::string> names;
  for (int i = 0; i < state_dim_; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

FeatureLibrary default_reward_library(int state_dim, int action_dim) {
  return FeatureLibrary::polynomial(state_dim + action_dim, PolynomialSpec{2, true, true, {}});
}

EnsembleModel fit_reward_model(const MatrixXd& next_states, const MatrixXd& actions,
                               const VectorXd& rewards, const FeatureLibrary& lib,
                               const EnsembleConfig& config) {
  if (next_states.rows() != actions.rows() || next_states.rows() != rewards.size())
    throw ShapeError("fit_reward_model: row counts differ");
  Dataset data;
  data.X.resize(next_states.rows(), next_states.cols() + actions.cols());
  data.X << next_states, actions;
  data.Y = rewards;
  return ensemble_fit(lib, data, config);
}

}  // namespace sindyrl
