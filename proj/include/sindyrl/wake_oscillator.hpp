#pragma once

#include "sindyrl/environment.hpp"

#include <numbers>

namespace sindyrl {

struct WakeParams {
  double sigma = 0.1;    // linear growth rate
  double omega = 1.0;    // shedding frequency
  double lambda = 1.0;   // mean-field relaxation rate
  double tau = 0.556;    // lift sensor low-pass time constant
  double c0 = 1.5;       // drag: c0 + c1 z + c2 u^2
  double c1 = 1.0;
  double c2 = 0.1;
  double agent_dt = 0.1;
  double solver_dt = 0.01;
  int horizon = 1000;
  double max_torque = std::numbers::pi / 2.0;
  double reset_noise = 0.1;
};

/// Hidden state: oscillator amplitudes (a, b), mean-field deformation z, and
/// the filtered lift reading c.
struct WakeState {
  double a = 0.0;
  double b = 0.0;
  double z = 0.0;
  double lift = 0.0;
};

WakeState wake_derivative(const WakeState& s, double u, const WakeParams& p);
WakeState wake_rk4(const WakeState& s, double u, double dt, const WakeParams& p);
double wake_drag(const WakeState& s, double u, const WakeParams& p);

/// Mean-field wake oscillator observed only through (C_L, dC_L/dt). The
/// reward -agent_dt * C_D depends on the hidden z, so model-based training
/// has to learn a reward surrogate from observations.
class WakeOscillator final : public Environment {
 public:
  explicit WakeOscillator(WakeParams params = {});

  int observation_dim() const override { return 2; }
  int action_dim() const override { return 1; }
  ActionBounds action_bounds() const override;
  int horizon() const override { return params_.horizon; }

  VectorXd reset(std::uint64_t seed) override;
  StepResult step(const VectorXd& action) override;
  std::unique_ptr<Environment> clone() const override;
  std::string name() const override { return "wake"; }
  std::vector<std::string> observation_names() const override;

  void set_state(const WakeState& s);
  const WakeState& state() const { return state_; }
  const WakeParams& params() const { return params_; }

 private:
  VectorXd observe() const;

  WakeParams params_;
  WakeState state_;
  double lift_rate_ = 0.0;
  int t_ = 0;
};

}  // namespace sindyrl
