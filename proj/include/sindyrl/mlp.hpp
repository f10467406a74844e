#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace sindyrl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Fully connected network with tanh hidden layers and a linear output.
///
/// Parameters live in one flat vector, layer by layer: W (out x in,
/// column-major) followed by b. Batched calls take samples as columns.
class Mlp {
 public:
  struct Cache {
    std::vector<MatrixXd> activations;  // input, hidden..., output
  };

  Mlp() = default;
  explicit Mlp(std::vector<int> sizes);

  /// Row-normalized Gaussian init ("normc"): each output unit's incoming
  /// weights have norm `hidden_gain` (hidden) or `output_gain` (last layer).
  void init_normc(std::mt19937_64& rng, double hidden_gain, double output_gain);

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  const std::vector<int>& sizes() const { return sizes_; }
  Eigen::Index num_params() const { return params_.size(); }

  VectorXd& params() { return params_; }
  const VectorXd& params() const { return params_; }

  Eigen::Map<const MatrixXd> weight(int layer) const;
  Eigen::Map<const VectorXd> bias(int layer) const;
  Eigen::Map<MatrixXd> weight(int layer);
  Eigen::Map<VectorXd> bias(int layer);

  MatrixXd forward(const MatrixXd& X, Cache* cache = nullptr) const;
  VectorXd forward(const VectorXd& x) const;

  /// Accumulates dL/dparams into `grad` given dL/doutput (out x B).
  void backward(const Cache& cache, const MatrixXd& d_output, VectorXd& grad) const;

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::Index> offsets_;
  VectorXd params_;
};

/// First-order adaptive-moment optimizer over a flat parameter vector.
class Adam {
 public:
  Adam() = default;
  explicit Adam(Eigen::Index n, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-5);

  void step(VectorXd& params, const VectorXd& grad, double lr);

  const VectorXd& first_moment() const { return m_; }
  const VectorXd& second_moment() const { return v_; }
  long long steps() const { return t_; }
  void restore(VectorXd m, VectorXd v, long long t);

 private:
  VectorXd m_;
  VectorXd v_;
  long long t_ = 0;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-5;
};

}  // namespace sindyrl
