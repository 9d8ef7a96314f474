#include "orthofuse/pipeline.hpp"

#include <cmath>
#include <cstdio>

#include "orthofuse/errors.hpp"
#include "orthofuse/nuisance.hpp"

namespace orthofuse {

namespace {

std::string lambda_tag(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string MethodSpec::label() const {
  switch (kind) {
    case Kind::adaptive: return "adaptive";
    case Kind::personalized: return "personalized";
    case Kind::uniform: return "uniform:" + lambda_tag(lambda);
    case Kind::fixed: return "fixed:" + lambda_tag(lambda);
  }
  return "?";
}

MethodSpec MethodSpec::parse(const std::string& label) {
  MethodSpec m;
  if (label == "adaptive") {
    m.kind = Kind::adaptive;
  } else if (label == "personalized") {
    m.kind = Kind::personalized;
  } else if (label.rfind("uniform:", 0) == 0) {
    m.kind = Kind::uniform;
    m.lambda = std::stod(label.substr(8));
  } else if (label.rfind("fixed:", 0) == 0) {
    m.kind = Kind::fixed;
    m.lambda = std::stod(label.substr(6));
  } else {
    throw Error(Errc::invalid_config, "unknown method '" + label + "'");
  }
  return m;
}

PreparedTasks prepare_tasks(std::vector<TaskDataset> tasks, const PipelineConfig& cfg,
                            std::uint64_t seed, std::uint64_t rep) {
  if (cfg.crossfit_R < 2) throw Error(Errc::invalid_config, "crossfit_R must be >= 2");
  PreparedTasks out;
  out.tasks = std::move(tasks);
  const int m = static_cast<int>(out.tasks.size());
  out.losses.reserve(m);
  out.pilots.theta_init.reserve(m);

  for (int idx = 0; idx < m; ++idx) {
    TaskDataset& task = out.tasks[idx];
    task.validate(cfg.model);
    const std::uint64_t tid = static_cast<std::uint64_t>(idx) + 1;

    Rng pilot_rng(seed, stream::salted(stream::kPilot, rep, tid));
    out.pilots.theta_init.push_back(fit_pilot(task, cfg.model, cfg.learner, cfg.clip, pilot_rng));

    Rng split_rng(seed, stream::salted(stream::kSplit, rep, tid));
    task = split_dataset(std::move(task), cfg.crossfit_R, split_rng);

    Rng learn_rng(seed, stream::salted(stream::kLearner, rep, tid));
    if (cfg.crossfit_R == 2) {
      // single split: nuisances on the first half, loss on the second
      const auto train = fold_rows(task, 0);
      const auto eval = fold_rows(task, 1);
      const auto fits = fit_task_nuisances(task, cfg.model, cfg.learner, train, cfg.clip, learn_rng);
      const auto preds = predict_all(fits, task.covariates);
      switch (cfg.model) {
        case ModelKind::plm:
          out.losses.push_back(build_plm_loss(task, preds.at("h"), preds.at("m"), eval));
          break;
        case ModelKind::ate:
          out.losses.push_back(
              build_ate_loss(task, preds.at("pi"), preds.at("m1"), preds.at("m0"), eval));
          break;
        case ModelKind::did:
          out.losses.push_back(build_did_loss(task, preds.at("pi"), preds.at("m"), train, eval));
          break;
      }
    } else {
      // R-fold cross-fitting: for each fold, nuisances on the complement and
      // the loss on the fold, then average the fold losses
      std::vector<TaskLoss> fold_losses;
      for (int r = 0; r < cfg.crossfit_R; ++r) {
        const auto train = complement_rows(task, r);
        const auto eval = fold_rows(task, r);
        const auto fits =
            fit_task_nuisances(task, cfg.model, cfg.learner, train, cfg.clip, learn_rng);
        const auto preds = predict_all(fits, task.covariates);
        switch (cfg.model) {
          case ModelKind::plm:
            fold_losses.push_back(build_plm_loss(task, preds.at("h"), preds.at("m"), eval));
            break;
          case ModelKind::ate:
            fold_losses.push_back(
                build_ate_loss(task, preds.at("pi"), preds.at("m1"), preds.at("m0"), eval));
            break;
          case ModelKind::did:
            fold_losses.push_back(build_did_loss(task, preds.at("pi"), preds.at("m"), train, eval));
            break;
        }
      }
      out.losses.push_back(crossfit_average(fold_losses));
    }
  }
  return out;
}

MethodResult run_method(const PreparedTasks& prepared, const MethodSpec& method,
                        const PipelineConfig& cfg) {
  const int m = static_cast<int>(prepared.losses.size());
  MethodResult res;
  switch (method.kind) {
    case MethodSpec::Kind::adaptive:
      res.penalty = compute_weights(prepared.pilots, cfg.fusion);
      break;
    case MethodSpec::Kind::personalized:
      res.penalty = uniform_penalty(m, 0.0);
      break;
    case MethodSpec::Kind::uniform:
    case MethodSpec::Kind::fixed:
      res.penalty = uniform_penalty(m, method.lambda);
      break;
  }

  std::vector<SmoothLossOracle> oracles;
  oracles.reserve(m);
  for (const auto& l : prepared.losses) oracles.push_back(SmoothLossOracle::from_quadratic(l.quad));

  res.solution = solve_fused(oracles, res.penalty, cfg.solver);
  res.cluster_of.assign(m, 0);
  for (std::size_t k = 0; k < res.solution.partition.size(); ++k)
    for (int j : res.solution.partition[k]) res.cluster_of[j] = static_cast<int>(k);

  res.inference = sandwich_inference(res.solution.partition, prepared.losses,
                                     res.solution.theta_hat, cfg.level);
  if (cfg.refit) res.refit_estimates = refit_clusters(oracles, res.solution.partition);
  return res;
}

}  // namespace orthofuse
