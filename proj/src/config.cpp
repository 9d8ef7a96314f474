#include "orthofuse/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "orthofuse/errors.hpp"

namespace orthofuse {

using nlohmann::json;

const char* run_mode_name(RunMode m) {
  switch (m) {
    case RunMode::simulate: return "simulate";
    case RunMode::fit: return "fit";
    case RunMode::infer_report: return "infer-report";
  }
  return "?";
}

RunMode run_mode_from_name(const std::string& s) {
  if (s == "simulate") return RunMode::simulate;
  if (s == "fit") return RunMode::fit;
  if (s == "infer-report") return RunMode::infer_report;
  throw Error(Errc::invalid_config, "unknown mode '" + s + "'");
}

PipelineConfig RunConfig::pipeline() const {
  PipelineConfig p;
  p.model = model;
  p.learner = learner;
  p.fusion = fusion;
  p.solver = solver;
  p.crossfit_R = crossfit_R;
  p.level = level;
  p.refit = refit;
  p.clip = clip;
  return p;
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw Error(Errc::invalid_config, "unknown key '" + key + "' in " + where);
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json dgp_to_json(const DgpConfig& d) {
  return json{{"m", d.m},           {"K", d.K},         {"delta", d.delta},
              {"n0", d.n0},         {"n_step", d.n_step}, {"p0", d.p0},
              {"p_step", d.p_step}, {"xi_max", d.xi_max}};
}

DgpConfig dgp_from_json(const json& j, ModelKind model, std::uint64_t seed) {
  check_keys(j, {"m", "K", "delta", "n0", "n_step", "p0", "p_step", "xi_max"}, "dgp");
  DgpConfig d;
  d.model = model;
  d.seed = seed;
  maybe(j, "m", d.m);
  maybe(j, "K", d.K);
  maybe(j, "delta", d.delta);
  maybe(j, "n0", d.n0);
  maybe(j, "n_step", d.n_step);
  maybe(j, "p0", d.p0);
  maybe(j, "p_step", d.p_step);
  maybe(j, "xi_max", d.xi_max);
  if (d.m < 1 || d.K < 1 || d.K > d.m)
    throw Error(Errc::invalid_config, "dgp needs 1 <= K <= m");
  if (!(d.delta > 0)) throw Error(Errc::invalid_config, "dgp.delta must be positive");
  if (d.xi_max < 0) throw Error(Errc::invalid_config, "dgp.xi_max must be nonnegative");
  return d;
}

json learner_to_json(const NuisanceLearnerSpec& l) {
  return json{{"kind", learner_name(l.kind)},
              {"trees", l.trees},
              {"max_depth", l.max_depth},
              {"learning_rate", l.learning_rate},
              {"min_leaf", l.min_leaf},
              {"l2_penalty", l.l2_penalty}};
}

NuisanceLearnerSpec learner_from_json(const json& j) {
  check_keys(j, {"kind", "trees", "max_depth", "learning_rate", "min_leaf", "l2_penalty"},
             "learner");
  NuisanceLearnerSpec l;
  if (j.contains("kind")) l.kind = learner_from_name(j.at("kind").get<std::string>());
  maybe(j, "trees", l.trees);
  maybe(j, "max_depth", l.max_depth);
  maybe(j, "learning_rate", l.learning_rate);
  maybe(j, "min_leaf", l.min_leaf);
  maybe(j, "l2_penalty", l.l2_penalty);
  l.validate();
  return l;
}

json fusion_to_json(const FusionHyperparams& f) {
  return json{{"c_w", f.c_w}, {"gamma", f.gamma}, {"tau", f.tau},
              {"eps_n", f.eps_n}, {"w_cap", f.w_cap}};
}

FusionHyperparams fusion_from_json(const json& j) {
  check_keys(j, {"c_w", "gamma", "tau", "eps_n", "w_cap"}, "fusion");
  FusionHyperparams f;
  maybe(j, "c_w", f.c_w);
  maybe(j, "gamma", f.gamma);
  maybe(j, "tau", f.tau);
  maybe(j, "eps_n", f.eps_n);
  maybe(j, "w_cap", f.w_cap);
  if (!(f.c_w > 0) || !(f.gamma > 0) || f.tau < 0 || f.eps_n < 0 || f.w_cap < f.tau)
    throw Error(Errc::invalid_config, "fusion hyperparameters out of range");
  return f;
}

json solver_to_json(const SolverConfig& s) {
  return json{{"rho", s.rho},
              {"tol_abs", s.tol_abs},
              {"tol_rel", s.tol_rel},
              {"max_iter", s.max_iter},
              {"residual_balance", s.residual_balance},
              {"balance_factor", s.balance_factor},
              {"balance_trigger", s.balance_trigger},
              {"max_balance_steps", s.max_balance_steps},
              {"inner_newton_tol", s.inner_newton_tol},
              {"fuse_tol", s.fuse_tol}};
}

SolverConfig solver_from_json(const json& j) {
  check_keys(j,
             {"rho", "tol_abs", "tol_rel", "max_iter", "residual_balance", "balance_factor",
              "balance_trigger", "max_balance_steps", "inner_newton_tol", "fuse_tol"},
             "solver");
  SolverConfig s;
  maybe(j, "rho", s.rho);
  maybe(j, "tol_abs", s.tol_abs);
  maybe(j, "tol_rel", s.tol_rel);
  maybe(j, "max_iter", s.max_iter);
  maybe(j, "residual_balance", s.residual_balance);
  maybe(j, "balance_factor", s.balance_factor);
  maybe(j, "balance_trigger", s.balance_trigger);
  maybe(j, "max_balance_steps", s.max_balance_steps);
  maybe(j, "inner_newton_tol", s.inner_newton_tol);
  maybe(j, "fuse_tol", s.fuse_tol);
  if (!(s.rho > 0) || !(s.tol_abs > 0) || !(s.tol_rel > 0) || s.max_iter < 1 ||
      !(s.fuse_tol > 0))
    throw Error(Errc::invalid_config, "solver settings out of range");
  return s;
}

json data_to_json(const DataSourceConfig& d) {
  return json{{"path", d.path},
              {"task_col", d.mapping.task_col},
              {"outcome_cols", d.mapping.outcome_cols},
              {"treatment_col", d.mapping.treatment_col},
              {"covariate_cols", d.mapping.covariate_cols},
              {"min_task_size", d.mapping.min_task_size}};
}

DataSourceConfig data_from_json(const json& j) {
  check_keys(j, {"path", "task_col", "outcome_cols", "treatment_col", "covariate_cols",
                 "min_task_size"},
             "data_source");
  DataSourceConfig d;
  maybe(j, "path", d.path);
  maybe(j, "task_col", d.mapping.task_col);
  maybe(j, "outcome_cols", d.mapping.outcome_cols);
  maybe(j, "treatment_col", d.mapping.treatment_col);
  maybe(j, "covariate_cols", d.mapping.covariate_cols);
  maybe(j, "min_task_size", d.mapping.min_task_size);
  return d;
}

}  // namespace

json serialize_config(const RunConfig& cfg) {
  json j{{"mode", run_mode_name(cfg.mode)},
         {"model", model_name(cfg.model)},
         {"seed", cfg.seed},
         {"reps", cfg.reps},
         {"level", cfg.level},
         {"crossfit_R", cfg.crossfit_R},
         {"refit", cfg.refit},
         {"output_dir", cfg.output_dir},
         {"clip", {cfg.clip.first, cfg.clip.second}},
         {"learner", learner_to_json(cfg.learner)},
         {"fusion", fusion_to_json(cfg.fusion)},
         {"solver", solver_to_json(cfg.solver)}};
  j["dgp"] = dgp_to_json(cfg.dgp);
  json methods = json::array();
  for (const auto& m : cfg.methods) methods.push_back(m.label());
  j["methods"] = methods;
  if (cfg.mode == RunMode::fit || !cfg.data.path.empty()) j["data_source"] = data_to_json(cfg.data);
  return j;
}

RunConfig parse_config(const json& j) {
  check_keys(j,
             {"mode", "model", "seed", "reps", "level", "crossfit_R", "refit", "output_dir",
              "clip", "dgp", "methods", "data_source", "learner", "fusion", "solver"},
             "config");
  RunConfig cfg;
  if (j.contains("mode")) cfg.mode = run_mode_from_name(j.at("mode").get<std::string>());
  if (j.contains("model")) cfg.model = model_from_name(j.at("model").get<std::string>());
  maybe(j, "seed", cfg.seed);
  maybe(j, "reps", cfg.reps);
  maybe(j, "level", cfg.level);
  maybe(j, "crossfit_R", cfg.crossfit_R);
  maybe(j, "refit", cfg.refit);
  maybe(j, "output_dir", cfg.output_dir);
  if (j.contains("clip")) {
    const auto c = j.at("clip");
    if (!c.is_array() || c.size() != 2)
      throw Error(Errc::invalid_config, "clip must be [lo, hi]");
    cfg.clip = {c[0].get<double>(), c[1].get<double>()};
  }
  if (j.contains("learner")) cfg.learner = learner_from_json(j.at("learner"));
  if (j.contains("fusion")) cfg.fusion = fusion_from_json(j.at("fusion"));
  if (j.contains("solver")) cfg.solver = solver_from_json(j.at("solver"));
  if (j.contains("dgp")) cfg.dgp = dgp_from_json(j.at("dgp"), cfg.model, cfg.seed);
  cfg.dgp.model = cfg.model;
  cfg.dgp.seed = cfg.seed;
  if (j.contains("methods")) {
    cfg.methods.clear();
    for (const auto& m : j.at("methods")) cfg.methods.push_back(MethodSpec::parse(m.get<std::string>()));
  }
  if (j.contains("data_source")) cfg.data = data_from_json(j.at("data_source"));

  if (!(cfg.level > 0 && cfg.level < 1))
    throw Error(Errc::invalid_config, "level must be in (0,1)");
  if (cfg.reps < 1) throw Error(Errc::invalid_config, "reps must be >= 1");
  if (cfg.crossfit_R < 2) throw Error(Errc::invalid_config, "crossfit_R must be >= 2");
  if (!(cfg.clip.first > 0 && cfg.clip.first < cfg.clip.second && cfg.clip.second < 1))
    throw Error(Errc::invalid_config, "clip needs 0 < lo < hi < 1");
  if (cfg.mode == RunMode::simulate && cfg.methods.empty())
    cfg.methods = {MethodSpec{MethodSpec::Kind::adaptive, 0.0},
                   MethodSpec{MethodSpec::Kind::personalized, 0.0}};
  if (cfg.mode == RunMode::fit && cfg.data.path.empty())
    throw Error(Errc::invalid_config, "fit mode needs data_source.path");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_config, "cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_config, "config parse error: " + std::string(e.what()));
  }
  return parse_config(j);
}

std::string config_hash(const RunConfig& cfg) {
  // the hash identifies the run substance; the output location is not part of it
  json j = serialize_config(cfg);
  j.erase("output_dir");
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace orthofuse
