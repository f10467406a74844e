#include "sindyrl/wake_oscillator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sindyrl {

namespace {

WakeState axpy(const WakeState& s, double h, const WakeState& k) {
  return {s.a + h * k.a, s.b + h * k.b, s.z + h * k.z, s.lift + h * k.lift};
}

}  // namespace

WakeState wake_derivative(const WakeState& s, double u, const WakeParams& p) {
  const double growth = p.sigma - s.z;
  return {growth * s.a - p.omega * s.b + u,
          p.omega * s.a + growth * s.b,
          -p.lambda * (s.z - s.a * s.a - s.b * s.b),
          (s.a - s.lift) / p.tau};
}

WakeState wake_rk4(const WakeState& s, double u, double dt, const WakeParams& p) {
  const WakeState k1 = wake_derivative(s, u, p);
  const WakeState k2 = wake_derivative(axpy(s, 0.5 * dt, k1), u, p);
  const WakeState k3 = wake_derivative(axpy(s, 0.5 * dt, k2), u, p);
  const WakeState k4 = wake_derivative(axpy(s, dt, k3), u, p);
  return {s.a + dt / 6.0 * (k1.a + 2 * k2.a + 2 * k3.a + k4.a),
          s.b + dt / 6.0 * (k1.b + 2 * k2.b + 2 * k3.b + k4.b),
          s.z + dt / 6.0 * (k1.z + 2 * k2.z + 2 * k3.z + k4.z),
          s.lift + dt / 6.0 * (k1.lift + 2 * k2.lift + 2 * k3.lift + k4.lift)};
}

double wake_drag(const WakeState& s, double u, const WakeParams& p) {
  return p.c0 + p.c1 * s.z + p.c2 * u * u;
}

WakeOscillator::WakeOscillator(WakeParams params) : params_(params) {
  if (params_.horizon < 1) throw std::invalid_argument("wake: horizon must be >= 1");
  if (!(params_.agent_dt > 0.0 && params_.solver_dt > 0.0))
    throw std::invalid_argument("wake: time steps must be positive");
}

ActionBounds WakeOscillator::action_bounds() const {
  return {VectorXd::Constant(1, -params_.max_torque), VectorXd::Constant(1, params_.max_torque)};
}

VectorXd WakeOscillator::observe() const {
  VectorXd obs(2);
  obs << state_.lift, lift_rate_;
  return obs;
}

VectorXd WakeOscillator::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, params_.reset_noise);
  state_.a = noise(rng);
  state_.b = noise(rng);
  state_.z = state_.a * state_.a + state_.b * state_.b;
  state_.lift = state_.a;
  lift_rate_ = 0.0;
  t_ = 0;
  return observe();
}

void WakeOscillator::set_state(const WakeState& s) {
  state_ = s;
  lift_rate_ = 0.0;
  t_ = 0;
}

StepResult WakeOscillator::step(const VectorXd& action) {
  if (action.size() != 1) throw std::invalid_argument("wake: action must have size 1");
  const double u = std::clamp(action(0), -params_.max_torque, params_.max_torque);
  const double previous_lift = state_.lift;
  const int substeps = std::max(1, static_cast<int>(std::lround(params_.agent_dt / params_.solver_dt)));
  const double h = params_.agent_dt / substeps;
  for (int i = 0; i < substeps; ++i) state_ = wake_rk4(state_, u, h, params_);
  ++t_;
  if (!std::isfinite(state_.a) || !std::isfinite(state_.b) || !std::isfinite(state_.z) ||
      !std::isfinite(state_.lift))
    throw EnvironmentDiverged("wake: non-finite state at step " + std::to_string(t_));
  lift_rate_ = (state_.lift - previous_lift) / params_.agent_dt;

  StepResult r;
  r.observation = observe();
  const double drag = wake_drag(state_, u, params_);
  r.reward = -params_.agent_dt * drag;
  r.done = t_ >= params_.horizon;
  r.info = {{"a", state_.a}, {"b", state_.b}, {"z", state_.z}, {"drag", drag}};
  return r;
}

std::unique_ptr<Environment> WakeOscillator::clone() const {
  return std::make_unique<WakeOscillator>(*this);
}

std::vector<std::string> WakeOscillator::observation_names() const {
  return {"lift", "lift_rate"};
}

}  // namespace sindyrl
