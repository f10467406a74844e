#pragma once

#include "sindyrl/environment.hpp"

#include <array>

namespace sindyrl {

struct CartPoleParams {
  double cart_mass = 1.0;    // kg
  double pole_mass = 0.1;    // kg
  double half_length = 0.5;  // m
  double gravity = 9.81;
  double force_gain = 10.0;  // N per unit action
  double dt = 0.01;
  int horizon = 1000;
  double reset_noise = 0.01;
};

/// Internal generalized coordinates; theta = 0 is upright.
struct CartPoleState {
  double x = 0.0;
  double theta = 0.0;
  double x_dot = 0.0;
  double theta_dot = 0.0;
};

/// Frictionless cart-pole, rod pole, force applied to the cart.
CartPoleState cartpole_derivative(const CartPoleState& s, double force, const CartPoleParams& p);
CartPoleState cartpole_rk4(const CartPoleState& s, double force, double dt, const CartPoleParams& p);
double cartpole_energy(const CartPoleState& s, const CartPoleParams& p);

/// Observation layout (x, cos theta, sin theta, x_dot, theta_dot).
VectorXd cartpole_observe(const CartPoleState& s);

/// Product-of-tolerances swing-up reward evaluated on an observation and the
/// (clipped, unscaled) action. Always in [0, 1].
double swingup_reward(const VectorXd& obs, double u);

/// Initial observation drawn exactly as SwingUp::reset draws it.
VectorXd swingup_initial_observation(std::uint64_t seed, const CartPoleParams& p = {});

class SwingUp final : public Environment {
 public:
  explicit SwingUp(CartPoleParams params = {});

  int observation_dim() const override { return 5; }
  int action_dim() const override { return 1; }
  ActionBounds action_bounds() const override;
  int horizon() const override { return params_.horizon; }

  VectorXd reset(std::uint64_t seed) override;
  StepResult step(const VectorXd& action) override;
  std::unique_ptr<Environment> clone() const override;
  std::string name() const override { return "swingup"; }
  std::vector<std::string> observation_names() const override;

  void set_state(const CartPoleState& s);
  const CartPoleState& state() const { return state_; }
  const CartPoleParams& params() const { return params_; }

 private:
  CartPoleParams params_;
  CartPoleState state_;
  int t_ = 0;
};

}  // namespace sindyrl
