#include "sindyrl/swingup.hpp"

#include "sindyrl/tolerance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace sindyrl {

namespace {

CartPoleState axpy(const CartPoleState& s, double h, const CartPoleState& k) {
  return {s.x + h * k.x, s.theta + h * k.theta, s.x_dot + h * k.x_dot,
          s.theta_dot + h * k.theta_dot};
}

CartPoleState sample_initial_state(std::uint64_t seed, const CartPoleParams& p) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, p.reset_noise);
  CartPoleState s;
  s.x = noise(rng);
  s.theta = std::numbers::pi + noise(rng);
  s.x_dot = noise(rng);
  s.theta_dot = noise(rng);
  return s;
}

}  // namespace

CartPoleState cartpole_derivative(const CartPoleState& s, double force, const CartPoleParams& p) {
  const double total = p.cart_mass + p.pole_mass;
  const double ml = p.pole_mass * p.half_length;
  const double c = std::cos(s.theta);
  const double sn = std::sin(s.theta);
  const double temp = (force + ml * s.theta_dot * s.theta_dot * sn) / total;
  const double theta_acc =
      (p.gravity * sn - c * temp) / (p.half_length * (4.0 / 3.0 - p.pole_mass * c * c / total));
  const double x_acc = temp - ml * theta_acc * c / total;
  return {s.x_dot, s.theta_dot, x_acc, theta_acc};
}

CartPoleState cartpole_rk4(const CartPoleState& s, double force, double dt, const CartPoleParams& p) {
  const CartPoleState k1 = cartpole_derivative(s, force, p);
  const CartPoleState k2 = cartpole_derivative(axpy(s, 0.5 * dt, k1), force, p);
  const CartPoleState k3 = cartpole_derivative(axpy(s, 0.5 * dt, k2), force, p);
  const CartPoleState k4 = cartpole_derivative(axpy(s, dt, k3), force, p);
  return {s.x + dt / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
          s.theta + dt / 6.0 * (k1.theta + 2 * k2.theta + 2 * k3.theta + k4.theta),
          s.x_dot + dt / 6.0 * (k1.x_dot + 2 * k2.x_dot + 2 * k3.x_dot + k4.x_dot),
          s.theta_dot + dt / 6.0 * (k1.theta_dot + 2 * k2.theta_dot + 2 * k3.theta_dot + k4.theta_dot)};
}

double cartpole_energy(const CartPoleState& s, const CartPoleParams& p) {
  const double m = p.pole_mass;
  const double l = p.half_length;
  const double kinetic = 0.5 * (p.cart_mass + m) * s.x_dot * s.x_dot +
                         m * l * s.x_dot * s.theta_dot * std::cos(s.theta) +
                         (2.0 / 3.0) * m * l * l * s.theta_dot * s.theta_dot;
  return kinetic + m * p.gravity * l * std::cos(s.theta);
}

VectorXd cartpole_observe(const CartPoleState& s) {
  VectorXd obs(5);
  obs << s.x, std::cos(s.theta), std::sin(s.theta), s.x_dot, s.theta_dot;
  return obs;
}

double swingup_reward(const VectorXd& obs, double u) {
  const double upright = (1.0 + obs(1)) / 2.0;
  const double centered = (1.0 + tolerance(obs(0), 0.0, 0.0, 2.0, 0.1, ToleranceShape::kGaussian)) / 2.0;
  const double small_control =
      (4.0 + tolerance(u, 0.0, 0.0, 1.0, 0.0, ToleranceShape::kQuadratic)) / 5.0;
  const double small_velocity =
      (1.0 + tolerance(obs(4), 0.0, 0.0, 5.0, 0.1, ToleranceShape::kGaussian)) / 2.0;
  return upright * centered * small_control * small_velocity;
}

VectorXd swingup_initial_observation(std::uint64_t seed, const CartPoleParams& p) {
  return cartpole_observe(sample_initial_state(seed, p));
}

SwingUp::SwingUp(CartPoleParams params) : params_(params) {
  if (params_.horizon < 1) throw std::invalid_argument("swingup: horizon must be >= 1");
  if (!(params_.dt > 0.0)) throw std::invalid_argument("swingup: dt must be positive");
  state_ = sample_initial_state(0, params_);
}

ActionBounds SwingUp::action_bounds() const {
  return {VectorXd::Constant(1, -1.0), VectorXd::Constant(1, 1.0)};
}

VectorXd SwingUp::reset(std::uint64_t seed) {
  state_ = sample_initial_state(seed, params_);
  t_ = 0;
  return cartpole_observe(state_);
}

void SwingUp::set_state(const CartPoleState& s) {
  state_ = s;
  t_ = 0;
}

StepResult SwingUp::step(const VectorXd& action) {
  if (action.size() != 1) throw std::invalid_argument("swingup: action must have size 1");
  const double u = std::clamp(action(0), -1.0, 1.0);
  state_ = cartpole_rk4(state_, params_.force_gain * u, params_.dt, params_);
  ++t_;
  if (!std::isfinite(state_.x) || !std::isfinite(state_.theta) || !std::isfinite(state_.x_dot) ||
      !std::isfinite(state_.theta_dot))
    throw EnvironmentDiverged("swingup: non-finite state at step " + std::to_string(t_));
  StepResult r;
  r.observation = cartpole_observe(state_);
  r.reward = swingup_reward(r.observation, u);
  r.done = t_ >= params_.horizon;
  r.info = {{"theta", state_.theta}, {"energy", cartpole_energy(state_, params_)}};
  return r;
}

std::unique_ptr<Environment> SwingUp::clone() const { return std::make_unique<SwingUp>(*this); }

std::vector<std::string> SwingUp::observation_names() const {
  return {"x", "cos_theta", "sin_theta", "x_dot", "theta_dot"};
}

}  // namespace sindyrl
