#include "sindyrl/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace sindyrl {

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("mlp: need at least input and output sizes");
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] < 1 || sizes_[l + 1] < 1) throw std::invalid_argument("mlp: layer sizes must be >= 1");
    offsets_.push_back(offset);
    offset += static_cast<Eigen::Index>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
  params_ = VectorXd::Zero(offset);
}

Eigen::Map<const MatrixXd> Mlp::weight(int l) const {
  return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
}
Eigen::Map<const VectorXd> Mlp::bias(int l) const {
  return {params_.data() + offsets_[l] + static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l],
          sizes_[l + 1]};
}
Eigen::Map<MatrixXd> Mlp::weight(int l) {
  return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
}
Eigen::Map<VectorXd> Mlp::bias(int l) {
  return {params_.data() + offsets_[l] + static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l],
          sizes_[l + 1]};
}

void Mlp::init_normc(std::mt19937_64& rng, double hidden_gain, double output_gain) {
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int l = 0; l < num_layers(); ++l) {
    auto W = weight(l);
    for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = n01(rng);
    const double gain = l + 1 == num_layers() ? output_gain : hidden_gain;
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      const double norm = W.row(r).norm();
      if (norm > 0.0) W.row(r) *= gain / norm;
    }
    bias(l).setZero();
  }
}

MatrixXd Mlp::forward(const MatrixXd& X, Cache* cache) const {
  if (X.rows() != input_dim()) throw std::invalid_argument("mlp: input has the wrong dimension");
  if (cache) {
    cache->activations.resize(num_layers() + 1);
    cache->activations[0] = X;
  }
  MatrixXd h = X;
  for (int l = 0; l < num_layers(); ++l) {
    MatrixXd z = weight(l) * h;
    z.colwise() += bias(l);
    if (l + 1 < num_layers()) z = z.array().tanh().matrix();
    h = std::move(z);
    if (cache) cache->activations[l + 1] = h;
  }
  return h;
}

VectorXd Mlp::forward(const VectorXd& x) const {
  if (x.size() != input_dim()) throw std::invalid_argument("mlp: input has the wrong dimension");
  VectorXd h = x;
  for (int l = 0; l < num_layers(); ++l) {
    VectorXd z = weight(l) * h + bias(l);
    if (l + 1 < num_layers()) z = z.array().tanh().matrix();
    h = std::move(z);
  }
  return h;
}

void Mlp::backward(const Cache& cache, const MatrixXd& d_output, VectorXd& grad) const {
  if (grad.size() != params_.size()) grad = VectorXd::Zero(params_.size());
  MatrixXd delta = d_output;
  for (int l = num_layers() - 1; l >= 0; --l) {
    const MatrixXd& input = cache.activations[l];
    Eigen::Map<MatrixXd> gW(grad.data() + offsets_[l], sizes_[l + 1], sizes_[l]);
    Eigen::Map<VectorXd> gb(grad.data() + offsets_[l] + static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l],
                            sizes_[l + 1]);
    gW.noalias() += delta * input.transpose();
    gb += delta.rowwise().sum();
    if (l > 0) {
      MatrixXd back = weight(l).transpose() * delta;
      // input = tanh(z): d tanh = 1 - tanh^2
      delta = back.array() * (1.0 - input.array().square());
    }
  }
}

Adam::Adam(Eigen::Index n, double beta1, double beta2, double eps)
    : m_(VectorXd::Zero(n)), v_(VectorXd::Zero(n)), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(VectorXd& params, const VectorXd& grad, double lr) {
  if (grad.size() != params.size() || m_.size() != params.size())
    throw std::invalid_argument("adam: size mismatch");
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + eps_);
}

void Adam::restore(VectorXd m, VectorXd v, long long t) {
  if (m.size() != m_.size() || v.size() != v_.size()) throw std::invalid_argument("adam: restore size mismatch");
  m_ = std::move(m);
  v_ = std::move(v);
  t_ = t;
}

}  // namespace sindyrl
