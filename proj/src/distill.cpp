#include "sindyrl/distill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sindyrl {

namespace {
constexpr std::uint64_t kTrajectoryStream = 0xD7;
constexpr std::uint64_t kNoiseStream = 0xD8;
constexpr std::uint64_t kReplayStream = 0xD9;
constexpr std::uint64_t kSplitStream = 0xDA;
constexpr std::uint64_t kCellStream = 0xDB;

void project_circle(VectorXd& x, const std::optional<std::pair<int, int>>& circle) {
  if (!circle) return;
  const auto [ic, is] = *circle;
  const double norm = std::hypot(x(ic), x(is));
  if (norm > 0.0) {
    x(ic) /= norm;
    x(is) /= norm;
  }
}
}  // namespace

std::string to_string(SamplingKind k) {
  switch (k) {
    case SamplingKind::kAmbientMesh: return "ambient_mesh";
    case SamplingKind::kProjectedMesh: return "projected_mesh";
    case SamplingKind::kSurrogateTrajectories: return "surrogate_trajectories";
    case SamplingKind::kSurrogateTrajectoriesNoise: return "surrogate_trajectories_noise";
    case SamplingKind::kReplay: return "replay";
    case SamplingKind::kReplayNoise: return "replay_noise";
  }
  return "";
}

SamplingKind sampling_kind_from_string(const std::string& s) {
  for (auto k : {SamplingKind::kAmbientMesh, SamplingKind::kProjectedMesh, SamplingKind::kSurrogateTrajectories,
                 SamplingKind::kSurrogateTrajectoriesNoise, SamplingKind::kReplay, SamplingKind::kReplayNoise})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown sampling strategy '" + s + "'");
}

InitialStateSampler swingup_distill_sampler(SwingUpInit init) {
  if (init.theta_std < 0.0 || init.other_std < 0.0) throw std::invalid_argument("swing-up init: negative std");
  return [init](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> theta(init.theta_mean, init.theta_std);
    std::normal_distribution<double> other(0.0, init.other_std);
    const double x = other(rng);
    const double th = theta(rng);
    const double x_dot = other(rng);
    const double th_dot = other(rng);
    VectorXd s(5);
    s << x, std::cos(th), std::sin(th), x_dot, th_dot;
    return s;
  };
}

MatrixXd sample_states(const SamplingStrategy& st, const SurrogateEnv* surrogate,
                       const PolicyFn& teacher_mean, const DataStore* store) {
  if (st.noise < 0.0) throw std::invalid_argument("sample_states: noise must be >= 0");
  std::vector<VectorXd> base;
  const bool noisy = st.kind == SamplingKind::kSurrogateTrajectoriesNoise || st.kind == SamplingKind::kReplayNoise;

  switch (st.kind) {
    case SamplingKind::kAmbientMesh:
    case SamplingKind::kProjectedMesh: {
      std::vector<MeshAxis> axes = st.mesh;
      if (axes.empty()) {
        if (!store || store->size() == 0) throw std::invalid_argument("sample_states: mesh needs axes or a datastore");
        const auto states = store->states();
        const auto dim = states.front().size();
        VectorXd lo = states.front(), hi = states.front();
        for (const auto& s : states) {
          lo = lo.cwiseMin(s);
          hi = hi.cwiseMax(s);
        }
        for (Eigen::Index i = 0; i < dim; ++i) axes.push_back({lo(i), hi(i), st.mesh_points});
      }
      std::size_t total = 1;
      for (const auto& a : axes) {
        if (a.points < 1) throw std::invalid_argument("sample_states: mesh axis needs >= 1 point");
        total *= static_cast<std::size_t>(a.points);
      }
      std::vector<int> idx(axes.size(), 0);
      for (std::size_t n = 0; n < total; ++n) {
        VectorXd x(static_cast<Eigen::Index>(axes.size()));
        for (std::size_t a = 0; a < axes.size(); ++a) {
          const auto& ax = axes[a];
          x(static_cast<Eigen::Index>(a)) =
              ax.points == 1 ? ax.lo : ax.lo + (ax.hi - ax.lo) * idx[a] / static_cast<double>(ax.points - 1);
        }
        if (st.kind == SamplingKind::kProjectedMesh) project_circle(x, st.circle);
        base.push_back(std::move(x));
        for (int a = static_cast<int>(axes.size()) - 1; a >= 0; --a) {
          if (++idx[a] < axes[a].points) break;
          idx[a] = 0;
        }
      }
      break;
    }
    case SamplingKind::kSurrogateTrajectories:
    case SamplingKind::kSurrogateTrajectoriesNoise: {
      if (!surrogate) throw std::invalid_argument("sample_states: trajectory sampling needs a surrogate");
      if (st.trajectory_length < 1 || st.n_samples < 1)
        throw std::invalid_argument("sample_states: trajectory_length and n_samples must be >= 1");
      SurrogateEnv env = *surrogate;
      const auto& bounds = env.spec().bounds;
      std::uint64_t traj = 0;
      int consecutive_rejects = 0;
      while (static_cast<int>(base.size()) < st.n_samples) {
        const std::uint64_t s = derive_seed(st.seed, kTrajectoryStream, traj++);
        VectorXd x = st.init_sampler ? st.init_sampler(s) : env.reset(s);
        if (!bounds.contains(x)) {
          if (++consecutive_rejects > 10000) throw std::runtime_error("sample_states: initial states never inside bounds");
          continue;
        }
        consecutive_rejects = 0;
        env.set_state(x);
        for (int t = 0; t < st.trajectory_length && static_cast<int>(base.size()) < st.n_samples; ++t) {
          base.push_back(x);
          if (t + 1 == st.trajectory_length) break;
          const StepResult r = env.transition(x, teacher_mean(x));
          if (r.done) break;
          x = r.observation;
        }
      }
      break;
    }
    case SamplingKind::kReplay:
    case SamplingKind::kReplayNoise: {
      if (!store || store->size() == 0) throw std::invalid_argument("sample_states: replay needs a datastore");
      const auto states = store->states();
      std::mt19937_64 rng(derive_seed(st.seed, kReplayStream));
      std::uniform_int_distribution<std::size_t> pick(0, states.size() - 1);
      for (int i = 0; i < st.n_samples; ++i) base.push_back(states[pick(rng)]);
      break;
    }
  }
  if (base.empty()) throw std::runtime_error("sample_states: no states produced");

  const Eigen::Index dim = base.front().size();
  const std::size_t copies = noisy ? 2 : 1;
  MatrixXd X(static_cast<Eigen::Index>(base.size() * copies), dim);
  std::mt19937_64 rng(derive_seed(st.seed, kNoiseStream));
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::Index row = 0;
  for (const auto& x : base) {
    for (std::size_t c = 0; c < copies; ++c) {
      VectorXd y = x;
      if (noisy && st.noise > 0.0)
        for (Eigen::Index i = 0; i < dim; ++i) y(i) += st.noise * n01(rng);
      X.row(row++) = y.transpose();
    }
  }
  return X;
}

DistillResult distill_policy(const PolicyFn& teacher_mean, const MatrixXd& states, const DistillConfig& config) {
  if (states.rows() < 1) throw std::invalid_argument("distill_policy: no states");
  if (config.thresholds.empty() || config.alphas.empty())
    throw std::invalid_argument("distill_policy: empty sweep grid");
  const Eigen::Index N = states.rows();
  const VectorXd first = teacher_mean(states.row(0).transpose());
  MatrixXd labels(N, first.size());
  for (Eigen::Index i = 0; i < N; ++i)
    labels.row(i) = teacher_mean(states.row(i).transpose())
                        .cwiseMax(-config.label_clip)
                        .cwiseMin(config.label_clip)
                        .transpose();

  std::vector<Eigen::Index> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(config.seed, kSplitStream));
  std::shuffle(order.begin(), order.end(), rng);
  Eigen::Index n_val = static_cast<Eigen::Index>(std::floor(config.validation_frac * static_cast<double>(N)));
  if (N >= 2) n_val = std::clamp<Eigen::Index>(n_val, 1, N - 1);
  else n_val = 0;
  const Eigen::Index n_train = N - n_val;

  Dataset train;
  train.X.resize(n_train, states.cols());
  train.Y.resize(n_train, labels.cols());
  MatrixXd val_X(std::max<Eigen::Index>(n_val, 1), states.cols());
  MatrixXd val_Y(std::max<Eigen::Index>(n_val, 1), labels.cols());
  for (Eigen::Index i = 0; i < n_train; ++i) {
    train.X.row(i) = states.row(order[i]);
    train.Y.row(i) = labels.row(order[i]);
  }
  if (n_val == 0) {
    val_X = train.X;
    val_Y = train.Y;
  } else {
    for (Eigen::Index i = 0; i < n_val; ++i) {
      val_X.row(i) = states.row(order[n_train + i]);
      val_Y.row(i) = labels.row(order[n_train + i]);
    }
  }

  const FeatureLibrary lib = FeatureLibrary::polynomial(static_cast<int>(states.cols()), config.library);
  DistillResult result;
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t cell = 0;
  for (double th : config.thresholds) {
    for (double alpha : config.alphas) {
      EnsembleConfig ec;
      ec.n_members = config.n_members;
      ec.row_bag_frac = config.row_bag_frac;
      ec.lib_bag_frac = config.lib_bag_frac;
      ec.threshold = th;
      ec.alpha = alpha;
      ec.aggregation = Aggregation::kMean;
      ec.seed = derive_seed(config.seed, kCellStream, cell++);
      EnsembleModel model = ensemble_fit(lib, train, ec);
      const double mse = (predict(model, val_X) - val_Y).squaredNorm() / static_cast<double>(val_Y.size());
      result.report.push_back({th, alpha, mse, model.aggregated().nonzero_count()});
      if (mse < best) {
        best = mse;
        result.selected = result.report.size() - 1;
        result.policy = std::move(model);
      }
    }
  }
  if (!std::isfinite(best)) throw std::runtime_error("distill_policy: every sweep cell produced a non-finite error");
  return result;
}

PolicyFn dictionary_policy(std::shared_ptr<const EnsembleModel> model, ActionBounds bounds) {
  if (!model) throw std::invalid_argument("dictionary_policy: null model");
  return [model = std::move(model), bounds = std::move(bounds)](const VectorXd& x) {
    return bounds.clip(predict(*model, x));
  };
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

PolicyComparison compare_policies(Environment& env, const PolicyFn& teacher, const PolicyFn& student,
                                  int n_episodes, std::uint64_t seed) {
  PolicyComparison out;
  out.teacher_returns = evaluate(env, teacher, n_episodes, seed).returns;
  out.student_returns = evaluate(env, student, n_episodes, seed).returns;
  out.teacher_median = median(out.teacher_returns);
  out.student_median = median(out.student_returns);
  return out;
}

}  // namespace sindyrl
