#include "sindyrl/dyna.hpp"

#include "sindyrl/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace sindyrl {

namespace {

// Sub-seed streams; see derive_seed.
constexpr std::uint64_t kOfflineStream = 1;
constexpr std::uint64_t kFitStream = 2;
constexpr std::uint64_t kPolicyInitStream = 3;
constexpr std::uint64_t kSurrogateStream = 4;
constexpr std::uint64_t kDeployStream = 5;
constexpr std::uint64_t kDynaEvalStream = 6;
constexpr std::uint64_t kTrainerStream = 7;

Transition to_transition(const RolloutBatch& b, Eigen::Index t, const ActionBounds& bounds) {
  return {b.observations.col(t), bounds.clip(b.actions.col(t)), b.next_observations.col(t), b.rewards(t)};
}

}  // namespace

DataStore::DataStore(std::size_t queue_capacity) : capacity_(queue_capacity) {
  if (capacity_ < 1) throw std::invalid_argument("datastore: queue capacity must be >= 1");
}

void DataStore::add_offline(Transition t) { offline_.push_back(std::move(t)); }

void DataStore::push_on_policy(Transition t) {
  on_policy_.push_back(std::move(t));
  while (on_policy_.size() > capacity_) on_policy_.pop_front();
}

Dataset DataStore::dynamics_dataset() const {
  if (size() == 0) throw std::invalid_argument("datastore is empty");
  const Transition& first = offline_.empty() ? on_policy_.front() : offline_.front();
  const auto sd = first.x.size();
  const auto ad = first.u.size();
  Dataset d;
  d.X.resize(static_cast<Eigen::Index>(size()), sd + ad);
  d.Y.resize(static_cast<Eigen::Index>(size()), sd);
  Eigen::Index r = 0;
  for_each([&](const Transition& t) {
    d.X.row(r).head(sd) = t.x.transpose();
    d.X.row(r).tail(ad) = t.u.transpose();
    d.Y.row(r) = t.x_next.transpose();
    ++r;
  });
  return d;
}

Dataset DataStore::reward_dataset() const {
  if (size() == 0) throw std::invalid_argument("datastore is empty");
  const Transition& first = offline_.empty() ? on_policy_.front() : offline_.front();
  const auto sd = first.x.size();
  const auto ad = first.u.size();
  Dataset d;
  d.X.resize(static_cast<Eigen::Index>(size()), sd + ad);
  d.Y.resize(static_cast<Eigen::Index>(size()), 1);
  Eigen::Index r = 0;
  for_each([&](const Transition& t) {
    d.X.row(r).head(sd) = t.x_next.transpose();
    d.X.row(r).tail(ad) = t.u.transpose();
    d.Y(r, 0) = t.r;
    ++r;
  });
  return d;
}

std::vector<VectorXd> DataStore::states() const {
  std::vector<VectorXd> out;
  out.reserve(size());
  for_each([&](const Transition& t) { out.push_back(t.x); });
  return out;
}

void DataStore::save_csv(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  if (size() == 0) return;
  const Transition& first = offline_.empty() ? on_policy_.front() : offline_.front();
  out << "source";
  for (Eigen::Index i = 0; i < first.x.size(); ++i) out << ",x" << i;
  for (Eigen::Index i = 0; i < first.u.size(); ++i) out << ",u" << i;
  for (Eigen::Index i = 0; i < first.x.size(); ++i) out << ",x_next" << i;
  out << ",r\n";
  auto row = [&](const char* src, const Transition& t) {
    out << src;
    for (Eigen::Index i = 0; i < t.x.size(); ++i) out << ',' << t.x(i);
    for (Eigen::Index i = 0; i < t.u.size(); ++i) out << ',' << t.u(i);
    for (Eigen::Index i = 0; i < t.x_next.size(); ++i) out << ',' << t.x_next(i);
    out << ',' << t.r << '\n';
  };
  for (const auto& t : offline_) row("offline", t);
  for (const auto& t : on_policy_) row("on_policy", t);
}

DataStore DataStore::load_csv(const std::filesystem::path& path, std::size_t queue_capacity) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  DataStore store(queue_capacity);
  std::string line;
  if (!std::getline(in, line)) return store;
  int nx = 0, nu = 0;
  {
    std::istringstream header(line);
    std::string col;
    while (std::getline(header, col, ',')) {
      if (col.rfind("x_next", 0) == 0) continue;
      if (col.rfind("x", 0) == 0) ++nx;
      else if (col.rfind("u", 0) == 0) ++nu;
    }
  }
  if (nx < 1 || nu < 1) throw std::invalid_argument("datastore csv header has no state/action columns");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string src, cell;
    std::getline(row, src, ',');
    std::vector<double> v;
    while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
    if (static_cast<int>(v.size()) != 2 * nx + nu + 1)
      throw std::invalid_argument("datastore csv row has the wrong number of columns");
    Transition t;
    t.x = Eigen::Map<const VectorXd>(v.data(), nx);
    t.u = Eigen::Map<const VectorXd>(v.data() + nx, nu);
    t.x_next = Eigen::Map<const VectorXd>(v.data() + nx + nu, nx);
    t.r = v.back();
    if (src == "offline") store.add_offline(std::move(t));
    else if (src == "on_policy") store.push_on_policy(std::move(t));
    else throw std::invalid_argument("datastore csv: unknown source '" + src + "'");
  }
  return store;
}

std::vector<Transition> collect_offline(Environment& env, const OfflinePolicy& policy, int n_off,
                                        std::uint64_t seed) {
  if (n_off < 1) throw std::invalid_argument("collect_offline: n_off must be >= 1");
  const ActionBounds bounds = env.action_bounds();
  std::mt19937_64 rng(derive_seed(seed, 0xA11));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Transition> out;
  out.reserve(n_off);
  std::uint64_t episode = 0;
  VectorXd obs = env.reset(derive_seed(seed, 0xE915, episode++));
  int t = 0;
  double phase = 0.0;
  while (static_cast<int>(out.size()) < n_off) {
    VectorXd u(env.action_dim());
    for (Eigen::Index j = 0; j < u.size(); ++j) {
      if (policy.kind == OfflinePolicyKind::kUniform) {
        u(j) = bounds.low(j) + (bounds.high(j) - bounds.low(j)) * unit(rng);
      } else {
        // Linear chirp over the episode, frequencies in cycles per 100 steps.
        const double frac = static_cast<double>(t) / std::max(1, env.horizon() - 1);
        const double freq = policy.min_frequency + (policy.max_frequency - policy.min_frequency) * frac;
        const double mid = 0.5 * (bounds.high(j) + bounds.low(j));
        const double amp = 0.5 * (bounds.high(j) - bounds.low(j));
        u(j) = mid + amp * std::sin(phase + static_cast<double>(j) * std::numbers::pi / 2.0);
        if (j + 1 == u.size()) phase += 2.0 * std::numbers::pi * freq / 100.0;
      }
    }
    StepResult r = env.step(u);
    out.push_back({obs, bounds.clip(u), r.observation, r.reward});
    ++t;
    if (r.done) {
      obs = env.reset(derive_seed(seed, 0xE915, episode++));
      t = 0;
      phase = 0.0;
    } else {
      obs = std::move(r.observation);
    }
  }
  return out;
}

FeatureLibrary LibraryConfig::build(int state_dim, int action_dim) const {
  if (structure == LibraryStructure::kControlAffine)
    return FeatureLibrary::control_affine(state_dim, action_dim, f, g);
  return FeatureLibrary::polynomial(state_dim + action_dim, f);
}

FittedModels refit_models(const DataStore& store, const ModelConfig& config, int state_dim,
                          int action_dim, std::uint64_t seed) {
  if (store.size() == 0) throw std::invalid_argument("refit_models: datastore is empty");
  FittedModels out;
  EnsembleConfig dyn_cfg = config.dynamics_ensemble;
  dyn_cfg.seed = derive_seed(seed, 0xD1);
  out.dynamics = std::make_shared<const EnsembleModel>(
      ensemble_fit(config.dynamics_library.build(state_dim, action_dim), store.dynamics_dataset(), dyn_cfg));
  if (config.reward_library) {
    EnsembleConfig rew_cfg = config.reward_ensemble;
    rew_cfg.seed = derive_seed(seed, 0xE1);
    out.reward = std::make_shared<const EnsembleModel>(
        ensemble_fit(config.reward_library->build(state_dim, action_dim), store.reward_dataset(), rew_cfg));
  }
  return out;
}

SurrogateEnv make_surrogate(const FittedModels& models, const EnvProfile& profile,
                            const DataStore& store, const ActionBounds& action_bounds, int horizon) {
  SurrogateSpec spec;
  spec.dynamics = models.dynamics;
  spec.reward_model = models.reward;
  spec.reward_fn = profile.analytic_reward;
  if (!spec.reward_model && !spec.reward_fn)
    throw std::invalid_argument("profile '" + profile.name + "' needs a learned reward model");
  spec.bounds = profile.surrogate_bounds;
  spec.action_bounds = action_bounds;
  spec.circle = profile.circle;
  spec.horizon = horizon;
  spec.init_sampler = profile.replay_init ? replay_sampler(store.states(), profile.replay_noise)
                                          : profile.init_sampler;
  return SurrogateEnv(std::move(spec));
}

void DynaConfig::validate() const {
  if (n_off < 1) throw std::invalid_argument("dyna.n_off must be >= 1");
  if (n_collect < 1) throw std::invalid_argument("dyna.n_collect must be >= 1");
  if (n_batch < 1) throw std::invalid_argument("dyna.n_batch must be >= 1");
  if (n_refits < 1) throw std::invalid_argument("dyna.updates must be >= 1");
  if (queue_capacity < 1) throw std::invalid_argument("dyna.queue_capacity must be >= 1");
  if (eval_episodes < 1 || eval_every < 1)
    throw std::invalid_argument("dyna.eval_episodes and dyna.eval_every must be >= 1");
  if (surrogate_horizon < 1) throw std::invalid_argument("dyna.surrogate_horizon must be >= 1");
}

namespace {

nlohmann::json record_to_json(const RefitRecord& r) {
  return {{"refit", r.refit},
          {"gt_interactions", r.gt_interactions},
          {"eval_interactions", r.eval_interactions},
          {"surrogate_steps", r.surrogate_steps},
          {"policy_updates", r.policy_updates},
          {"eval_return", std::isnan(r.eval_return) ? nlohmann::json(nullptr) : nlohmann::json(r.eval_return)},
          {"best_return", r.best_return},
          {"policy_loss", r.policy_loss},
          {"value_loss", r.value_loss},
          {"learning_rate", r.learning_rate},
          {"refit_failed", r.refit_failed}};
}

RefitRecord record_from_json(const nlohmann::json& j) {
  RefitRecord r;
  r.refit = j.at("refit").get<int>();
  r.gt_interactions = j.at("gt_interactions").get<long long>();
  r.eval_interactions = j.at("eval_interactions").get<long long>();
  r.surrogate_steps = j.at("surrogate_steps").get<long long>();
  r.policy_updates = j.at("policy_updates").get<long long>();
  r.eval_return = j.at("eval_return").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                : j.at("eval_return").get<double>();
  r.best_return = j.at("best_return").get<double>();
  r.policy_loss = j.at("policy_loss").get<double>();
  r.value_loss = j.at("value_loss").get<double>();
  r.learning_rate = j.at("learning_rate").get<double>();
  r.refit_failed = j.at("refit_failed").get<bool>();
  return r;
}

}  // namespace

DynaResult run_dyna(const EnvProfile& profile, const DynaConfig& config, const ModelConfig& model_config,
                    PpoConfig ppo, const DynaHooks& hooks) {
  config.validate();
  ppo.anneal_updates = static_cast<long long>(config.n_refits) * config.n_batch;
  ppo.validate();

  std::unique_ptr<Environment> env = profile.make_env();
  const int sd = env->observation_dim();
  const int ad = env->action_dim();
  const ActionBounds bounds = env->action_bounds();

  DynaResult result;
  result.store = DataStore(config.queue_capacity);
  result.final_policy = ActorCritic::create(sd, ad, bounds, ppo.hidden, derive_seed(config.seed, kPolicyInitStream));
  result.best_policy = result.final_policy;
  ActorCritic& ac = result.final_policy;
  auto trainer = std::make_unique<PpoTrainer>(ac, ppo, derive_seed(config.seed, kTrainerStream));

  int start_refit = 1;
  const std::optional<std::filesystem::path>& ckpt = hooks.checkpoint_dir;
  if (ckpt && std::filesystem::exists(*ckpt / "state.json")) {
    const nlohmann::json state = read_json_file(*ckpt / "state.json");
    result.store = DataStore::load_csv(*ckpt / "datastore.csv", config.queue_capacity);
    ac = actor_critic_from_json(state.at("policy"));
    result.best_policy = actor_critic_from_json(state.at("best_policy"));
    result.best_return = state.at("best_return").get<double>();
    trainer = std::make_unique<PpoTrainer>(ac, ppo, derive_seed(config.seed, kTrainerStream));
    trainer->restore_state(state.at("trainer"));
    for (const auto& jr : state.at("records")) result.records.push_back(record_from_json(jr));
    start_refit = state.at("refit").get<int>() + 1;
    result.models = refit_models(result.store, model_config, sd, ad,
                                 derive_seed(config.seed, kFitStream, static_cast<std::uint64_t>(start_refit - 1)));
  } else {
    for (auto& t : collect_offline(*env, config.offline_policy, config.n_off,
                                   derive_seed(config.seed, kOfflineStream)))
      result.store.add_offline(std::move(t));
    result.models = refit_models(result.store, model_config, sd, ad, derive_seed(config.seed, kFitStream, 0));
    if (ckpt) {
      save_ensemble(*result.models.dynamics, *ckpt / "models" / "dynamics_0.json");
      if (result.models.reward) save_ensemble(*result.models.reward, *ckpt / "models" / "reward_0.json");
    }
  }

  RefitRecord last = result.records.empty() ? RefitRecord{} : result.records.back();
  if (result.records.empty()) last.gt_interactions = config.n_off;

  int refits_this_call = 0;
  for (int k = start_refit; k <= config.n_refits; ++k) {
    if (hooks.max_refits_this_call && refits_this_call >= *hooks.max_refits_this_call) break;
    if (config.stop_at_return && result.best_return >= *config.stop_at_return) break;
    if (config.reset_optimizer)
      trainer = std::make_unique<PpoTrainer>(ac, ppo, derive_seed(config.seed, kTrainerStream, static_cast<std::uint64_t>(k)));
    RefitRecord rec = last;
    rec.refit = k;
    rec.refit_failed = false;

    // Policy optimization purely on surrogate experience.
    {
      SurrogateEnv surrogate = make_surrogate(result.models, profile, result.store, bounds, config.surrogate_horizon);
      RolloutCollector collector(surrogate.clone(), derive_seed(config.seed, kSurrogateStream, static_cast<std::uint64_t>(k)));
      double pl = 0.0, vl = 0.0;
      for (int b = 0; b < config.n_batch; ++b) {
        RolloutBatch batch = collector.collect(ac, ppo.batch_size);
        const UpdateDiagnostics d = trainer->update(batch);
        pl += d.policy_loss;
        vl += d.value_loss;
        rec.learning_rate = d.learning_rate;
        rec.surrogate_steps += batch.size();
        ++rec.policy_updates;
      }
      rec.policy_loss = pl / config.n_batch;
      rec.value_loss = vl / config.n_batch;
    }

    // Deploy to the ground-truth environment and refresh the on-policy queue.
    {
      RolloutCollector deploy(env->clone(), derive_seed(config.seed, kDeployStream, static_cast<std::uint64_t>(k)));
      const RolloutBatch batch = deploy.collect(ac, config.n_collect);
      for (Eigen::Index t = 0; t < batch.size(); ++t) result.store.push_on_policy(to_transition(batch, t, bounds));
      rec.gt_interactions += batch.size();
    }

    try {
      FittedModels fresh = refit_models(result.store, model_config, sd, ad,
                                        derive_seed(config.seed, kFitStream, static_cast<std::uint64_t>(k)));
      result.models = std::move(fresh);
    } catch (const std::exception&) {
      rec.refit_failed = true;
    }

    if (k % config.eval_every == 0 || k == config.n_refits) {
      std::unique_ptr<Environment> eval_env = env->clone();
      const EvalResult ev = evaluate(*eval_env, deterministic_policy(ac), config.eval_episodes,
                                     derive_seed(config.seed, kDynaEvalStream, static_cast<std::uint64_t>(k)));
      rec.eval_return = ev.mean;
      rec.eval_interactions += ev.steps;
      if (ev.mean > result.best_return) {
        result.best_return = ev.mean;
        result.best_policy = ac;
      }
    } else {
      rec.eval_return = std::numeric_limits<double>::quiet_NaN();
    }
    rec.best_return = result.best_return;
    result.records.push_back(rec);
    last = rec;
    ++refits_this_call;

    if (ckpt) {
      save_ensemble(*result.models.dynamics, *ckpt / "models" / ("dynamics_" + std::to_string(k) + ".json"));
      if (result.models.reward)
        save_ensemble(*result.models.reward, *ckpt / "models" / ("reward_" + std::to_string(k) + ".json"));
      result.store.save_csv(*ckpt / "datastore.csv");
      nlohmann::json records = nlohmann::json::array();
      for (const auto& r : result.records) records.push_back(record_to_json(r));
      write_json_file({{"refit", k},
                       {"best_return", result.best_return},
                       {"policy", actor_critic_to_json(ac)},
                       {"best_policy", actor_critic_to_json(result.best_policy)},
                       {"trainer", trainer->state_to_json()},
                       {"records", records}},
                      *ckpt / "state.json");
    }
    if (hooks.on_refit) hooks.on_refit(rec);
  }
  return result;
}

std::vector<SweepRow> sweep(const EnvProfile& profile, const SweepConfig& sc, const DynaConfig& base,
                            const ModelConfig& models, const PpoConfig& ppo, int workers) {
  if (sc.n_batch.empty() || sc.n_collect.empty() || sc.seeds.empty())
    throw std::invalid_argument("sweep: grid and seed list must be nonempty");
  struct Job {
    int n_batch;
    int n_collect;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int nb : sc.n_batch)
    for (int nc : sc.n_collect)
      for (std::uint64_t s : sc.seeds) jobs.push_back({nb, nc, s});
  std::vector<SweepRow> rows(jobs.size());

  auto run_job = [&](std::size_t i) {
    const Job& job = jobs[i];
    DynaConfig cfg = base;
    cfg.n_batch = job.n_batch;
    cfg.n_collect = job.n_collect;
    cfg.seed = job.seed;
    cfg.n_refits = static_cast<int>(std::max<long long>(1, sc.total_policy_updates / job.n_batch));
    cfg.stop_at_return = sc.threshold;
    SweepRow row{job.n_batch, job.n_collect, job.seed, std::nullopt, 0.0};
    DynaHooks hooks;
    hooks.on_refit = [&](const RefitRecord& r) {
      if (!row.interactions_to_threshold && r.best_return >= sc.threshold)
        row.interactions_to_threshold = r.gt_interactions;
    };
    const DynaResult res = run_dyna(profile, cfg, models, ppo, hooks);
    row.best_return = res.best_return;
    rows[i] = row;
  };

  const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  if (n_workers == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_job(i);
  } else {
    std::mutex mu;
    std::size_t next = 0;
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          std::size_t i;
          {
            std::lock_guard lock(mu);
            if (next >= jobs.size()) return;
            i = next++;
          }
          run_job(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  return rows;
}

std::vector<SweepCell> summarize_sweep(const std::vector<SweepRow>& rows) {
  std::vector<SweepCell> cells;
  for (const auto& r : rows) {
    auto it = std::find_if(cells.begin(), cells.end(),
                           [&](const SweepCell& c) { return c.n_batch == r.n_batch && c.n_collect == r.n_collect; });
    if (it == cells.end()) cells.push_back({r.n_batch, r.n_collect, std::nullopt});
  }
  for (auto& cell : cells) {
    std::vector<double> v;
    for (const auto& r : rows)
      if (r.n_batch == cell.n_batch && r.n_collect == cell.n_collect)
        v.push_back(r.interactions_to_threshold ? static_cast<double>(*r.interactions_to_threshold)
                                                : std::numeric_limits<double>::infinity());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    const double med = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    if (std::isfinite(med)) cell.median_interactions = med;
  }
  return cells;
}

}  // namespace sindyrl
