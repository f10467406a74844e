// sindyrl: config-driven front end for the model-based RL pipeline.
//
//   sindyrl fit-dynamics --config c.json [--data store.csv]
//   sindyrl train        --config c.json [--resume]
//   sindyrl distill      --config c.json --policy best_policy.json [--model dyn.json] [--data store.csv]
//   sindyrl eval         --config c.json --policy P.json [--episodes N]
//   sindyrl uq-map       --config c.json --model M.json
//   sindyrl sweep        --config c.json
//
// Exit codes: 0 ok, 2 config/usage error, 3 runtime failure.

#include "sindyrl/config.hpp"
#include "sindyrl/model_io.hpp"
#include "sindyrl/swingup.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>

using namespace sindyrl;
namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

constexpr const char* kMetricsHeader = "# sindyrl.metrics/1";

struct CommonArgs {
  std::string config;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ExperimentConfig load(const CommonArgs& a) {
  ExperimentConfig c = load_config(a.config);
  if (a.seed) {
    c.seed = *a.seed;
    c.dyna.seed = c.seed;
    c.distill.fit.seed = c.seed;
    if (c.seeds.size() == 1) c.seeds = {c.seed};
    c.sweep.seeds = c.seeds;
  }
  if (a.workers) {
    if (*a.workers < 1) throw ConfigError("workers", "must be >= 1");
    c.workers = *a.workers;
  }
  return c;
}

fs::path resolve_output(const CommonArgs& a, const ExperimentConfig& c) {
  fs::path out = a.output.empty() ? fs::path(c.output_dir) : fs::path(a.output);
  if (out.is_relative()) {
    if (const char* root = std::getenv("SINDYRL_OUTPUT_ROOT"); root && *root) out = fs::path(root) / out;
  }
  return out;
}

/// Creates the run directory; an existing non-empty one is a collision unless resuming.
fs::path prepare_run_dir(const CommonArgs& a, const ExperimentConfig& c, bool resume = false) {
  const fs::path dir = resolve_output(a, c);
  if (fs::exists(dir) && !fs::is_empty(dir) && !resume)
    throw UsageError("output directory " + dir.string() + " already exists and is not empty");
  fs::create_directories(dir);
  write_json_file(config_to_json(c), dir / "config.resolved.json");
  return dir;
}

std::ofstream open_csv(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << std::setprecision(17);
  return out;
}

fs::path require_file(const std::string& flag, const std::string& value) {
  if (value.empty()) throw UsageError(flag + " is required");
  if (!fs::exists(value)) throw UsageError(flag + ": no such file " + value);
  return value;
}

DataStore load_or_collect(const ExperimentConfig& c, const EnvProfile& profile, const std::string& data) {
  if (!data.empty()) return DataStore::load_csv(require_file("--data", data), c.dyna.queue_capacity);
  DataStore store(c.dyna.queue_capacity);
  auto env = profile.make_env();
  // Same stream as the offline phase of `train`, so the two agree.
  for (auto& t : collect_offline(*env, c.dyna.offline_policy, c.dyna.n_off, derive_seed(c.seed, 1)))
    store.add_offline(std::move(t));
  return store;
}

void write_fit_report(const EnsembleModel& model, const Dataset& data, const std::string& label, const fs::path& dir) {
  const MatrixXd pred = predict(model, data.X);
  const CoefficientMatrix& xi = model.aggregated();
  json outputs = json::array();
  for (Eigen::Index i = 0; i < data.Y.cols(); ++i) {
    const VectorXd y = data.Y.col(i);
    const double ss_res = (y - pred.col(i)).squaredNorm();
    const double ss_tot = (y.array() - y.mean()).square().sum();
    int active = 0;
    for (Eigen::Index t = 0; t < xi.values.rows(); ++t) active += xi.values(t, i) != 0.0;
    outputs.push_back({{"output", i}, {"r2", ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0)},
                       {"active_terms", active}});
  }
  write_json_file({{"model", label}, {"samples", data.size()}, {"outputs", outputs}}, dir / (label + "_fit_report.json"));

  // Coefficient heatmap: one row per output, one column per library term.
  auto out = open_csv(dir / (label + "_coefficients.csv"));
  out << "output";
  const auto& lib = model.library();
  for (int t = 0; t < lib.size(); ++t) out << ',' << lib.term_name(t);
  out << '\n';
  for (Eigen::Index i = 0; i < xi.values.cols(); ++i) {
    out << i;
    for (Eigen::Index t = 0; t < xi.values.rows(); ++t) out << ',' << xi.values(t, i);
    out << '\n';
  }
}

int cmd_fit_dynamics(const CommonArgs& a, const std::string& data) {
  const ExperimentConfig c = load(a);
  const EnvProfile profile = make_profile(c);
  const DataStore store = load_or_collect(c, profile, data);
  const fs::path dir = prepare_run_dir(a, c);
  auto env = profile.make_env();
  const FittedModels m = refit_models(store, c.models, env->observation_dim(), env->action_dim(), derive_seed(c.seed, 2));
  save_ensemble(*m.dynamics, dir / "dynamics.json");
  write_fit_report(*m.dynamics, store.dynamics_dataset(), "dynamics", dir);
  if (m.reward) {
    save_ensemble(*m.reward, dir / "reward.json");
    write_fit_report(*m.reward, store.reward_dataset(), "reward", dir);
  }
  store.save_csv(dir / "datastore.csv");
  std::cout << "wrote " << dir.string() << '\n';
  return 0;
}

void write_metrics(const std::vector<RefitRecord>& records, const fs::path& path) {
  auto out = open_csv(path);
  out << kMetricsHeader << '\n'
      << "refit,gt_interactions,eval_interactions,surrogate_steps,policy_updates,eval_return,best_return,"
         "policy_loss,value_loss,learning_rate,refit_failed\n";
  for (const auto& r : records)
    out << r.refit << ',' << r.gt_interactions << ',' << r.eval_interactions << ',' << r.surrogate_steps << ','
        << r.policy_updates << ',' << r.eval_return << ',' << r.best_return << ',' << r.policy_loss << ','
        << r.value_loss << ',' << r.learning_rate << ',' << (r.refit_failed ? 1 : 0) << '\n';
}

int cmd_train(const CommonArgs& a, bool resume, std::optional<int> max_refits) {
  const ExperimentConfig c = load(a);
  const EnvProfile profile = make_profile(c);
  const fs::path dir = prepare_run_dir(a, c, resume);
  DynaHooks hooks;
  hooks.checkpoint_dir = dir;
  hooks.max_refits_this_call = max_refits;
  hooks.on_refit = [&](const RefitRecord& r) {
    std::cout << "refit " << r.refit << " gt=" << r.gt_interactions << " eval=" << r.eval_return
              << " best=" << r.best_return << std::endl;
  };
  const DynaResult res = run_dyna(profile, c.dyna, c.models, c.ppo, hooks);
  write_metrics(res.records, dir / "metrics.csv");
  write_json_file(actor_critic_to_json(res.best_policy), dir / "best_policy.json");
  write_json_file(actor_critic_to_json(res.final_policy), dir / "final_policy.json");
  std::cout << "best return " << res.best_return << "; wrote " << dir.string() << '\n';
  return 0;
}

/// Loads either a network checkpoint or a distilled dictionary policy.
PolicyFn load_policy(const fs::path& path, const ActionBounds& bounds, std::optional<ActorCritic>* net = nullptr) {
  const json j = read_json_file(path);
  const std::string format = j.value("format", "");
  if (format.rfind("sindyrl.policy/", 0) == 0) {
    ActorCritic ac = actor_critic_from_json(j);
    if (net) *net = ac;
    return deterministic_policy(ac);
  }
  if (format.rfind("sindyrl.ensemble/", 0) == 0)
    return dictionary_policy(std::make_shared<const EnsembleModel>(ensemble_from_json(j)), bounds);
  throw UsageError(path.string() + ": unrecognized policy format '" + format + "'");
}

int cmd_distill(const CommonArgs& a, const std::string& policy_path, const std::string& model_path,
                const std::string& data) {
  const ExperimentConfig c = load(a);
  const EnvProfile profile = make_profile(c);
  auto env = profile.make_env();
  const ActorCritic teacher = actor_critic_from_json(read_json_file(require_file("--policy", policy_path)));
  const bool needs_model = c.distill.sampling == SamplingKind::kSurrogateTrajectories ||
                           c.distill.sampling == SamplingKind::kSurrogateTrajectoriesNoise;
  const bool needs_data = c.distill.sampling == SamplingKind::kReplay ||
                          c.distill.sampling == SamplingKind::kReplayNoise;
  std::optional<DataStore> store;
  if (!data.empty()) store = DataStore::load_csv(require_file("--data", data), c.dyna.queue_capacity);
  else if (needs_data || needs_model) store = load_or_collect(c, profile, "");

  std::optional<SurrogateEnv> surrogate;
  if (needs_model) {
    FittedModels m;
    m.dynamics = std::make_shared<const EnsembleModel>(load_ensemble(require_file("--model", model_path)));
    if (c.models.reward_library) {
      fs::path reward = fs::path(model_path).parent_path() / "reward.json";
      if (!fs::exists(reward)) throw UsageError("learned-reward environment needs reward.json next to --model");
      m.reward = std::make_shared<const EnsembleModel>(load_ensemble(reward));
    }
    surrogate = make_surrogate(m, profile, *store, env->action_bounds(), c.dyna.surrogate_horizon);
  }

  SamplingStrategy st;
  st.kind = c.distill.sampling;
  st.trajectory_length = c.distill.trajectory_length;
  st.noise = c.distill.noise;
  st.n_samples = c.distill.n_samples;
  st.mesh_points = c.distill.mesh_points;
  st.circle = profile.circle;
  st.init_sampler = c.env == "swingup" ? swingup_distill_sampler(c.distill.swingup_init) : InitialStateSampler{};
  st.seed = derive_seed(c.seed, 0xD15);

  const fs::path dir = prepare_run_dir(a, c);
  const PolicyFn teacher_mean = [&teacher](const VectorXd& x) { return policy_mean(teacher, x); };
  const MatrixXd X = sample_states(st, surrogate ? &*surrogate : nullptr, teacher_mean, store ? &*store : nullptr);
  const DistillResult res = distill_policy(teacher_mean, X, c.distill.fit);
  save_ensemble(res.policy, dir / "distilled_policy.json");

  auto rep = open_csv(dir / "distill_report.csv");
  rep << "threshold,alpha,validation_mse,nonzero,selected\n";
  for (std::size_t i = 0; i < res.report.size(); ++i) {
    const auto& r = res.report[i];
    rep << r.threshold << ',' << r.alpha << ',' << r.validation_mse << ',' << r.nonzero << ','
        << (i == res.selected ? 1 : 0) << '\n';
  }

  const PolicyComparison cmp =
      compare_policies(*env, deterministic_policy(teacher),
                       dictionary_policy(std::make_shared<const EnsembleModel>(res.policy), env->action_bounds()),
                       c.distill.compare_episodes, derive_seed(c.seed, 0xC0));
  auto out = open_csv(dir / "comparison.csv");
  out << "episode,teacher_return,student_return\n";
  for (std::size_t i = 0; i < cmp.teacher_returns.size(); ++i)
    out << i << ',' << cmp.teacher_returns[i] << ',' << cmp.student_returns[i] << '\n';
  std::cout << "teacher median " << cmp.teacher_median << ", student median " << cmp.student_median
            << ", coefficients " << res.policy.aggregated().nonzero_count() << '\n';
  return 0;
}

int cmd_eval(const CommonArgs& a, const std::string& policy_path, std::optional<int> episodes) {
  const ExperimentConfig c = load(a);
  const EnvProfile profile = make_profile(c);
  auto env = profile.make_env();
  const PolicyFn policy = load_policy(require_file("--policy", policy_path), env->action_bounds());
  const int n = episodes.value_or(c.dyna.eval_episodes);
  if (n < 1) throw UsageError("--episodes must be >= 1");
  const fs::path dir = prepare_run_dir(a, c);

  auto returns = open_csv(dir / "eval.csv");
  returns << "episode,return,steps\n";
  auto traj = open_csv(dir / "trajectories.csv");
  traj << "episode,step";
  for (const auto& name : env->observation_names()) traj << ',' << name;
  for (int j = 0; j < env->action_dim(); ++j) traj << ",u" << j;
  traj << ",reward,done\n";

  const std::uint64_t seed = derive_seed(c.seed, 6);
  const ActionBounds bounds = env->action_bounds();
  for (int ep = 0; ep < n; ++ep) {
    VectorXd obs = env->reset(derive_seed(seed, kEvalStream, static_cast<std::uint64_t>(ep)));
    double total = 0.0;
    int step = 0;
    for (bool done = false; !done; ++step) {
      const VectorXd u = bounds.clip(policy(obs));
      const StepResult r = env->step(u);
      traj << ep << ',' << step;
      for (Eigen::Index i = 0; i < obs.size(); ++i) traj << ',' << obs(i);
      for (Eigen::Index i = 0; i < u.size(); ++i) traj << ',' << u(i);
      traj << ',' << r.reward << ',' << (r.done ? 1 : 0) << '\n';
      total += r.reward;
      done = r.done;
      obs = r.observation;
    }
    returns << ep << ',' << total << ',' << step << '\n';
    std::cout << "episode " << ep << " return " << total << '\n';
  }
  return 0;
}

int cmd_uq_map(const CommonArgs& a, const std::string& model_path) {
  const ExperimentConfig c = load(a);
  const EnsembleModel model = load_ensemble(require_file("--model", model_path));
  LandscapeSpec spec;
  if (c.uq.landscape) spec = *c.uq.landscape;
  else if (c.env == "swingup" && model.input_dim() == 6) spec = swingup_dynamics_slice(c.uq.points);
  else throw ConfigError("uq.landscape", "no default slice for this model; specify axes and inputs");
  try {
    validate_landscape_spec(model, spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("uq.landscape", e.what());
  }
  const fs::path dir = prepare_run_dir(a, c);
  write_landscape(variance_landscape(model, spec), dir / "landscape.csv");
  std::cout << "wrote " << (dir / "landscape.csv").string() << '\n';
  return 0;
}

int cmd_sweep(const CommonArgs& a) {
  const ExperimentConfig c = load(a);
  const EnvProfile profile = make_profile(c);
  const fs::path dir = prepare_run_dir(a, c);
  const auto rows = sweep(profile, c.sweep, c.dyna, c.models, c.ppo, c.workers);
  auto out = open_csv(dir / "sweep.csv");
  out << "n_batch,n_collect,seed,interactions_to_threshold,best_return\n";
  for (const auto& r : rows) {
    out << r.n_batch << ',' << r.n_collect << ',' << r.seed << ',';
    if (r.interactions_to_threshold) out << *r.interactions_to_threshold;
    out << ',' << r.best_return << '\n';
  }
  auto sum = open_csv(dir / "sweep_summary.csv");
  sum << "n_batch,n_collect,median_interactions\n";
  for (const auto& cell : summarize_sweep(rows)) {
    sum << cell.n_batch << ',' << cell.n_collect << ',';
    if (cell.median_interactions) sum << *cell.median_interactions;
    sum << '\n';
  }
  std::cout << rows.size() << " runs; wrote " << dir.string() << '\n';
  return 0;
}

void add_common(CLI::App* sub, CommonArgs& a) {
  sub->add_option("--config", a.config, "experiment JSON")->required();
  sub->add_option("--output", a.output, "run directory (relative paths resolve under $SINDYRL_OUTPUT_ROOT)");
  sub->add_option("--seed", a.seed, "override the config seed");
  sub->add_option("--workers", a.workers, "override the worker count");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse dictionary learning for model-based reinforcement learning"};
  app.require_subcommand(1);
  CommonArgs common;
  std::string data, policy, model;
  bool resume = false;
  std::optional<int> episodes, max_refits;

  auto* fit = app.add_subcommand("fit-dynamics", "collect offline data (or load --data) and fit the dynamics ensemble");
  add_common(fit, common);
  fit->add_option("--data", data, "datastore CSV to fit instead of collecting");

  auto* train = app.add_subcommand("train", "run the Dyna-style training loop");
  add_common(train, common);
  train->add_flag("--resume", resume, "continue from the checkpoint in the output directory");
  train->add_option("--max-refits", max_refits, "stop after this many refits in this invocation");

  auto* distill = app.add_subcommand("distill", "fit a dictionary policy to a trained network policy");
  add_common(distill, common);
  distill->add_option("--policy", policy, "teacher checkpoint (best_policy.json)");
  distill->add_option("--model", model, "dynamics ensemble for trajectory sampling");
  distill->add_option("--data", data, "datastore CSV for replay/mesh sampling");

  auto* eval = app.add_subcommand("eval", "roll out a policy on the ground-truth environment");
  add_common(eval, common);
  eval->add_option("--policy", policy, "network or dictionary policy JSON");
  eval->add_option("--episodes", episodes, "episode count (default dyna.eval_episodes)");

  auto* uq = app.add_subcommand("uq-map", "variance landscape of an ensemble over a state-space slice");
  add_common(uq, common);
  uq->add_option("--model", model, "ensemble JSON");

  auto* sw = app.add_subcommand("sweep", "n_batch x n_collect x seeds grid of training runs");
  add_common(sw, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*fit) return cmd_fit_dynamics(common, data);
    if (*train) return cmd_train(common, resume, max_refits);
    if (*distill) return cmd_distill(common, policy, model, data);
    if (*eval) return cmd_eval(common, policy, episodes);
    if (*uq) return cmd_uq_map(common, model);
    if (*sw) return cmd_sweep(common);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}
