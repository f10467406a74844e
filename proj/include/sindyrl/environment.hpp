#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace sindyrl {

using Eigen::VectorXd;

struct StepResult {
  VectorXd observation;
  double reward = 0.0;
  bool done = false;
  /// Ground-truth hidden state and diagnostics. Only for tests and logging;
  /// agents never read it.
  std::map<std::string, double> info;
};

/// Raised when an integrator produces NaN/inf state.
class EnvironmentDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ActionBounds {
  VectorXd low;
  VectorXd high;

  VectorXd clip(const VectorXd& u) const { return u.cwiseMax(low).cwiseMin(high); }
};

/// Common stepping interface for ground-truth and surrogate environments.
/// Instances are stateful and single-threaded.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual int observation_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual ActionBounds action_bounds() const = 0;
  virtual int horizon() const = 0;

  /// Starts a new episode; the initial state is a pure function of `seed`.
  virtual VectorXd reset(std::uint64_t seed) = 0;
  /// Advances one agent step. Actions outside the bounds are clipped.
  virtual StepResult step(const VectorXd& action) = 0;

  virtual std::unique_ptr<Environment> clone() const = 0;
  virtual std::string name() const = 0;
  virtual std::vector<std::string> observation_names() const = 0;
};

}  // namespace sindyrl
