#include "sindyrl/policy.hpp"

#include <cmath>
#include <numbers>

namespace sindyrl {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ stream) ^ index);
}

ActorCritic ActorCritic::create(int obs_dim, int action_dim, ActionBounds bounds,
                                std::vector<int> hidden, std::uint64_t seed) {
  std::vector<int> psizes{obs_dim};
  psizes.insert(psizes.end(), hidden.begin(), hidden.end());
  std::vector<int> vsizes = psizes;
  psizes.push_back(action_dim);
  vsizes.push_back(1);
  ActorCritic ac;
  ac.policy = Mlp(psizes);
  ac.value = Mlp(vsizes);
  std::mt19937_64 rng(seed);
  ac.policy.init_normc(rng, 1.0, 0.01);
  ac.value.init_normc(rng, 1.0, 1.0);
  ac.log_std = VectorXd::Zero(action_dim);
  if (bounds.low.size() != action_dim || bounds.high.size() != action_dim)
    throw std::invalid_argument("actor-critic: action bounds have the wrong size");
  ac.bounds = std::move(bounds);
  return ac;
}

double gaussian_log_prob(const VectorXd& u, const VectorXd& mean, const VectorXd& log_std) {
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double lp = 0.0;
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    const double z = (u(j) - mean(j)) * std::exp(-log_std(j));
    lp += -0.5 * z * z - log_std(j) - half_log_2pi;
  }
  return lp;
}

double ActorCritic::log_prob(const VectorXd& x, const VectorXd& u) const {
  return gaussian_log_prob(u, mean_action(x), log_std);
}

VectorXd ActorCritic::sample(const VectorXd& x, std::mt19937_64& rng) const {
  std::normal_distribution<double> n01(0.0, 1.0);
  VectorXd u = mean_action(x);
  for (Eigen::Index j = 0; j < u.size(); ++j) u(j) += std::exp(log_std(j)) * n01(rng);
  return u;
}

PolicyFn deterministic_policy(const ActorCritic& ac) {
  return [ac](const VectorXd& x) { return ac.bounds.clip(ac.mean_action(x)); };
}

nlohmann::json mlp_to_json(const Mlp& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (int l = 0; l < net.num_layers(); ++l) {
    const auto W = net.weight(l);
    std::vector<double> w;
    w.reserve(W.size());
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) w.push_back(W(r, c));
    const auto b = net.bias(l);
    layers.push_back({{"in", W.cols()},
                      {"out", W.rows()},
                      {"weights", w},
                      {"bias", std::vector<double>(b.data(), b.data() + b.size())}});
  }
  return {{"layers", layers}};
}

Mlp mlp_from_json(const nlohmann::json& j) {
  const auto& layers = j.at("layers");
  if (layers.empty()) throw std::invalid_argument("mlp json has no layers");
  std::vector<int> sizes{layers.front().at("in").get<int>()};
  for (const auto& l : layers) sizes.push_back(l.at("out").get<int>());
  Mlp net(sizes);
  for (int l = 0; l < net.num_layers(); ++l) {
    const auto w = layers[l].at("weights").get<std::vector<double>>();
    const auto b = layers[l].at("bias").get<std::vector<double>>();
    auto W = net.weight(l);
    if (static_cast<Eigen::Index>(w.size()) != W.size() || static_cast<Eigen::Index>(b.size()) != W.rows())
      throw std::invalid_argument("mlp json layer has inconsistent sizes");
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = w[r * W.cols() + c];
    net.bias(l) = Eigen::Map<const VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  }
  return net;
}

nlohmann::json actor_critic_to_json(const ActorCritic& ac) {
  auto vec = [](const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"format", "sindyrl.policy/1"},
          {"activation", "tanh"},
          {"policy", mlp_to_json(ac.policy)},
          {"value", mlp_to_json(ac.value)},
          {"log_std", vec(ac.log_std)},
          {"action_low", vec(ac.bounds.low)},
          {"action_high", vec(ac.bounds.high)}};
}

ActorCritic actor_critic_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "sindyrl.policy/1")
    throw std::invalid_argument("not a policy checkpoint (format != sindyrl.policy/1)");
  auto vec = [](const nlohmann::json& a) {
    const auto v = a.get<std::vector<double>>();
    return VectorXd(Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  ActorCritic ac;
  ac.policy = mlp_from_json(j.at("policy"));
  ac.value = mlp_from_json(j.at("value"));
  ac.log_std = vec(j.at("log_std"));
  ac.bounds = {vec(j.at("action_low")), vec(j.at("action_high"))};
  if (ac.log_std.size() != ac.policy.output_dim())
    throw std::invalid_argument("policy checkpoint log_std size mismatch");
  return ac;
}

}  // namespace sindyrl
