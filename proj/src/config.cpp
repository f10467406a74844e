#include "sindyrl/config.hpp"

#include "sindyrl/model_io.hpp"

#include <set>

namespace sindyrl {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void read_value(const json& j, const std::string& path, double& out) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  out = j.get<double>();
}
void read_value(const json& j, const std::string& path, int& out) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  const auto v = j.get<long long>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(path, "integer out of range");
  out = static_cast<int>(v);
}
void read_value(const json& j, const std::string& path, long long& out) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  out = j.get<long long>();
}
void read_value(const json& j, const std::string& path, std::uint64_t& out) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<long long>() < 0))
    throw ConfigError(path, "expected a non-negative integer");
  out = j.get<std::uint64_t>();
}
void read_value(const json& j, const std::string& path, bool& out) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  out = j.get<bool>();
}
void read_value(const json& j, const std::string& path, std::string& out) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  out = j.get<std::string>();
}
template <typename T>
void read_value(const json& j, const std::string& path, std::vector<T>& out) {
  if (!j.is_array()) throw ConfigError(path, "expected an array");
  out.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    T v{};
    read_value(j[i], path + "[" + std::to_string(i) + "]", v);
    out.push_back(v);
  }
}

/// Object view that remembers which keys were consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string path(const std::string& key) const { return join(path_, key); }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) read_value(*it, path(key), out);
  }

  template <typename T>
  void require(const std::string& key, T& out) {
    if (!j_.contains(key)) throw ConfigError(path(key), "required field is missing");
    get(key, out);
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(path(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename T>
void check(bool ok, const std::string& path, const T& msg) {
  if (!ok) throw ConfigError(path, msg);
}

PolynomialSpec parse_poly(const json& j, const std::string& path, PolynomialSpec p) {
  Reader r(j, path);
  r.get("degree", p.degree);
  r.get("bias", p.bias);
  r.get("cross_terms", p.cross_terms);
  r.get("trig_inputs", p.trig_inputs);
  r.finish();
  check(p.degree >= 0, r.path("degree"), "must be >= 0");
  return p;
}

json poly_to_json(const PolynomialSpec& p) {
  return {{"degree", p.degree}, {"bias", p.bias}, {"cross_terms", p.cross_terms}, {"trig_inputs", p.trig_inputs}};
}

void parse_ensemble(Reader& r, EnsembleConfig& e) {
  r.get("n_members", e.n_members);
  r.get("row_bag_frac", e.row_bag_frac);
  r.get("lib_bag_frac", e.lib_bag_frac);
  r.get("threshold", e.threshold);
  r.get("alpha", e.alpha);
  r.get("max_iter", e.max_iter);
  std::string agg = to_string(e.aggregation);
  r.get("aggregation", agg);
  try {
    e.aggregation = aggregation_from_string(agg);
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(r.path("aggregation"), ex.what());
  }
  check(e.n_members >= 1, r.path("n_members"), "must be >= 1");
  check(e.row_bag_frac > 0.0 && e.row_bag_frac <= 1.0, r.path("row_bag_frac"), "must be in (0, 1]");
  check(e.lib_bag_frac > 0.0 && e.lib_bag_frac <= 1.0, r.path("lib_bag_frac"), "must be in (0, 1]");
  check(e.threshold >= 0.0, r.path("threshold"), "must be >= 0");
  check(e.alpha >= 0.0, r.path("alpha"), "must be >= 0");
  check(e.max_iter >= 1, r.path("max_iter"), "must be >= 1");
}

void parse_library(const json& j, const std::string& path, LibraryConfig& lib, EnsembleConfig& ens) {
  Reader r(j, path);
  std::string structure = lib.structure == LibraryStructure::kControlAffine ? "control_affine" : "plain";
  r.get("structure", structure);
  if (structure == "control_affine") lib.structure = LibraryStructure::kControlAffine;
  else if (structure == "plain") lib.structure = LibraryStructure::kPlain;
  else throw ConfigError(r.path("structure"), "expected control_affine or plain");
  if (const json* f = r.child("f")) lib.f = parse_poly(*f, r.path("f"), lib.f);
  if (const json* g = r.child("g")) lib.g = parse_poly(*g, r.path("g"), lib.g);
  if (const json* e = r.child("ensemble")) {
    Reader er(*e, r.path("ensemble"));
    parse_ensemble(er, ens);
    er.finish();
  }
  r.finish();
}

json library_to_json(const LibraryConfig& lib, const EnsembleConfig& e) {
  return {{"structure", lib.structure == LibraryStructure::kControlAffine ? "control_affine" : "plain"},
          {"f", poly_to_json(lib.f)},
          {"g", poly_to_json(lib.g)},
          {"ensemble",
           {{"n_members", e.n_members},
            {"row_bag_frac", e.row_bag_frac},
            {"lib_bag_frac", e.lib_bag_frac},
            {"threshold", e.threshold},
            {"alpha", e.alpha},
            {"max_iter", e.max_iter},
            {"aggregation", to_string(e.aggregation)}}}};
}

void parse_dyna(const json& j, DynaConfig& d) {
  Reader r(j, "dyna");
  r.get("n_off", d.n_off);
  r.get("n_collect", d.n_collect);
  r.get("n_batch", d.n_batch);
  r.get("updates", d.n_refits);
  r.get("queue_capacity", d.queue_capacity);
  r.get("eval_episodes", d.eval_episodes);
  r.get("eval_every", d.eval_every);
  r.get("surrogate_horizon", d.surrogate_horizon);
  r.get("reset_optimizer", d.reset_optimizer);
  if (const json* s = r.child("stop_at_return"); s && !s->is_null()) {
    double v = 0.0;
    read_value(*s, r.path("stop_at_return"), v);
    d.stop_at_return = v;
  }
  if (const json* p = r.child("offline_policy")) {
    Reader pr(*p, r.path("offline_policy"));
    std::string kind = d.offline_policy.kind == OfflinePolicyKind::kUniform ? "uniform" : "sinusoid";
    pr.get("kind", kind);
    if (kind == "uniform") d.offline_policy.kind = OfflinePolicyKind::kUniform;
    else if (kind == "sinusoid") d.offline_policy.kind = OfflinePolicyKind::kSinusoid;
    else throw ConfigError(pr.path("kind"), "expected uniform or sinusoid");
    pr.get("min_frequency", d.offline_policy.min_frequency);
    pr.get("max_frequency", d.offline_policy.max_frequency);
    pr.finish();
  }
  r.finish();
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    throw ConfigError(msg.substr(0, msg.find(' ')), msg);
  }
}

void parse_ppo(const json& j, PpoConfig& p) {
  Reader r(j, "ppo");
  r.get("gamma", p.gamma);
  r.get("lambda", p.lambda);
  r.get("vf_coef", p.vf_coef);
  r.get("clip", p.clip);
  r.get("vf_clip", p.vf_clip);
  r.get("max_grad_norm", p.max_grad_norm);
  r.get("lr_start", p.lr_start);
  r.get("lr_end", p.lr_end);
  r.get("batch_size", p.batch_size);
  r.get("minibatch_size", p.minibatch_size);
  r.get("epochs", p.epochs);
  r.get("entropy_coef", p.entropy_coef);
  r.get("adam_eps", p.adam_eps);
  r.get("hidden", p.hidden);
  r.finish();
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("ppo", e.what());
  }
}

void parse_distill(const json& j, DistillSection& d) {
  Reader r(j, "distill");
  if (const json* s = r.child("sampling")) {
    Reader sr(*s, r.path("sampling"));
    std::string kind = to_string(d.sampling);
    sr.get("kind", kind);
    try {
      d.sampling = sampling_kind_from_string(kind);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(sr.path("kind"), e.what());
    }
    sr.get("trajectory_length", d.trajectory_length);
    sr.get("noise", d.noise);
    sr.get("n_samples", d.n_samples);
    sr.get("mesh_points", d.mesh_points);
    if (const json* init = sr.child("swingup_init")) {
      Reader ir(*init, sr.path("swingup_init"));
      ir.get("theta_mean", d.swingup_init.theta_mean);
      ir.get("theta_std", d.swingup_init.theta_std);
      ir.get("other_std", d.swingup_init.other_std);
      ir.finish();
      check(d.swingup_init.theta_std >= 0.0, ir.path("theta_std"), "must be >= 0");
      check(d.swingup_init.other_std >= 0.0, ir.path("other_std"), "must be >= 0");
    }
    sr.finish();
    check(d.noise >= 0.0, sr.path("noise"), "must be >= 0");
    check(d.trajectory_length >= 1, sr.path("trajectory_length"), "must be >= 1");
    check(d.n_samples >= 1, sr.path("n_samples"), "must be >= 1");
    check(d.mesh_points >= 1, sr.path("mesh_points"), "must be >= 1");
  }
  if (const json* l = r.child("library")) d.fit.library = parse_poly(*l, r.path("library"), d.fit.library);
  r.get("thresholds", d.fit.thresholds);
  r.get("alphas", d.fit.alphas);
  r.get("n_members", d.fit.n_members);
  r.get("row_bag_frac", d.fit.row_bag_frac);
  r.get("lib_bag_frac", d.fit.lib_bag_frac);
  r.get("label_clip", d.fit.label_clip);
  r.get("validation_frac", d.fit.validation_frac);
  r.get("compare_episodes", d.compare_episodes);
  r.finish();
  check(!d.fit.thresholds.empty(), r.path("thresholds"), "sweep grid must not be empty");
  check(!d.fit.alphas.empty(), r.path("alphas"), "sweep grid must not be empty");
  check(d.fit.n_members >= 1, r.path("n_members"), "must be >= 1");
  check(d.fit.label_clip > 0.0, r.path("label_clip"), "must be > 0");
  check(d.fit.validation_frac >= 0.0 && d.fit.validation_frac < 1.0, r.path("validation_frac"), "must be in [0, 1)");
  check(d.compare_episodes >= 1, r.path("compare_episodes"), "must be >= 1");
}

void parse_uq(const json& j, UqSection& u) {
  Reader r(j, "uq");
  r.get("points", u.points);
  if (const json* l = r.child("landscape"); l && !l->is_null()) {
    try {
      u.landscape = landscape_spec_from_json(*l);
    } catch (const std::exception& e) {
      throw ConfigError(r.path("landscape"), e.what());
    }
  }
  r.finish();
  check(u.points >= 1, r.path("points"), "must be >= 1");
}

void parse_sweep(const json& j, SweepConfig& s) {
  Reader r(j, "sweep");
  r.get("n_batch", s.n_batch);
  r.get("n_collect", s.n_collect);
  r.get("total_policy_updates", s.total_policy_updates);
  r.get("threshold", s.threshold);
  r.finish();
  check(!s.n_batch.empty(), r.path("n_batch"), "must not be empty");
  check(!s.n_collect.empty(), r.path("n_collect"), "must not be empty");
  for (int v : s.n_batch) check(v >= 1, r.path("n_batch"), "entries must be >= 1");
  for (int v : s.n_collect) check(v >= 1, r.path("n_collect"), "entries must be >= 1");
  check(s.total_policy_updates >= 1, r.path("total_policy_updates"), "must be >= 1");
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  Reader r(j, "");
  const json* env = r.child("env");
  if (!env) throw ConfigError("env", "required field is missing");
  {
    Reader er(*env, "env");
    er.require("name", c.env);
    er.get("horizon", c.horizon);
    er.finish();
    check(c.env == "swingup" || c.env == "wake", "env.name", "expected swingup or wake");
    check(c.horizon >= 1, "env.horizon", "must be >= 1");
  }
  // Environment-dependent defaults.
  if (c.env == "wake") {
    LibraryConfig reward;
    reward.structure = LibraryStructure::kPlain;
    reward.f = {2, true, true, {}};
    c.models.reward_library = reward;
  }

  r.get("seed", c.seed);
  r.get("seeds", c.seeds);
  r.get("workers", c.workers);
  r.get("output_dir", c.output_dir);
  check(c.workers >= 1, "workers", "must be >= 1");
  c.dyna.seed = c.seed;
  if (const json* d = r.child("dyna")) parse_dyna(*d, c.dyna);
  if (const json* d = r.child("dynamics_lib"))
    parse_library(*d, "dynamics_lib", c.models.dynamics_library, c.models.dynamics_ensemble);
  if (const json* d = r.child("reward_lib")) {
    if (d->is_null()) {
      c.models.reward_library.reset();
    } else {
      LibraryConfig lib = c.models.reward_library.value_or(LibraryConfig{LibraryStructure::kPlain, {2, true, true, {}}, {}});
      parse_library(*d, "reward_lib", lib, c.models.reward_ensemble);
      c.models.reward_library = lib;
    }
  }
  check(c.env != "wake" || c.models.reward_library.has_value(), "reward_lib", "the wake environment needs a learned reward");
  if (const json* d = r.child("ppo")) parse_ppo(*d, c.ppo);
  if (const json* d = r.child("distill")) parse_distill(*d, c.distill);
  if (const json* d = r.child("uq")) parse_uq(*d, c.uq);
  if (const json* d = r.child("sweep")) parse_sweep(*d, c.sweep);
  r.finish();

  c.dyna.seed = c.seed;
  c.distill.fit.seed = c.seed;
  if (c.seeds.empty()) c.seeds = {c.seed};
  c.sweep.seeds = c.seeds;
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = read_json_file(path);
  } catch (const json::exception& e) {
    throw ConfigError("<file>", std::string("malformed JSON in ") + path.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError("<file>", e.what());
  }
  return parse_config(j);
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["env"] = {{"name", c.env}, {"horizon", c.horizon}};
  j["seed"] = c.seed;
  j["seeds"] = c.seeds;
  j["workers"] = c.workers;
  j["output_dir"] = c.output_dir;
  const DynaConfig& d = c.dyna;
  j["dyna"] = {{"n_off", d.n_off},
               {"n_collect", d.n_collect},
               {"n_batch", d.n_batch},
               {"updates", d.n_refits},
               {"queue_capacity", d.queue_capacity},
               {"eval_episodes", d.eval_episodes},
               {"eval_every", d.eval_every},
               {"surrogate_horizon", d.surrogate_horizon},
               {"reset_optimizer", d.reset_optimizer},
               {"stop_at_return", d.stop_at_return ? json(*d.stop_at_return) : json(nullptr)},
               {"offline_policy",
                {{"kind", d.offline_policy.kind == OfflinePolicyKind::kUniform ? "uniform" : "sinusoid"},
                 {"min_frequency", d.offline_policy.min_frequency},
                 {"max_frequency", d.offline_policy.max_frequency}}}};
  j["dynamics_lib"] = library_to_json(c.models.dynamics_library, c.models.dynamics_ensemble);
  j["reward_lib"] = c.models.reward_library ? library_to_json(*c.models.reward_library, c.models.reward_ensemble)
                                            : json(nullptr);
  const PpoConfig& p = c.ppo;
  j["ppo"] = {{"gamma", p.gamma},
              {"lambda", p.lambda},
              {"vf_coef", p.vf_coef},
              {"clip", p.clip},
              {"vf_clip", p.vf_clip},
              {"max_grad_norm", p.max_grad_norm},
              {"lr_start", p.lr_start},
              {"lr_end", p.lr_end},
              {"batch_size", p.batch_size},
              {"minibatch_size", p.minibatch_size},
              {"epochs", p.epochs},
              {"entropy_coef", p.entropy_coef},
              {"adam_eps", p.adam_eps},
              {"hidden", p.hidden}};
  const DistillSection& ds = c.distill;
  j["distill"] = {{"sampling",
                   {{"kind", to_string(ds.sampling)},
                    {"trajectory_length", ds.trajectory_length},
                    {"noise", ds.noise},
                    {"n_samples", ds.n_samples},
                    {"mesh_points", ds.mesh_points},
                    {"swingup_init",
                     {{"theta_mean", ds.swingup_init.theta_mean},
                      {"theta_std", ds.swingup_init.theta_std},
                      {"other_std", ds.swingup_init.other_std}}}}},
                  {"library", poly_to_json(ds.fit.library)},
                  {"thresholds", ds.fit.thresholds},
                  {"alphas", ds.fit.alphas},
                  {"n_members", ds.fit.n_members},
                  {"row_bag_frac", ds.fit.row_bag_frac},
                  {"lib_bag_frac", ds.fit.lib_bag_frac},
                  {"label_clip", ds.fit.label_clip},
                  {"validation_frac", ds.fit.validation_frac},
                  {"compare_episodes", ds.compare_episodes}};
  j["uq"] = {{"points", c.uq.points},
             {"landscape", c.uq.landscape ? landscape_spec_to_json(*c.uq.landscape) : json(nullptr)}};
  j["sweep"] = {{"n_batch", c.sweep.n_batch},
                {"n_collect", c.sweep.n_collect},
                {"total_policy_updates", c.sweep.total_policy_updates},
                {"threshold", c.sweep.threshold}};
  return j;
}

EnvProfile make_profile(const ExperimentConfig& c) { return make_profile(c.env, c.horizon); }

}  // namespace sindyrl
