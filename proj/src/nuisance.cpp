#include "orthofuse/nuisance.hpp"

#include <string>

#include "orthofuse/errors.hpp"

namespace orthofuse {

namespace {

std::vector<int> arm_rows(const TaskDataset& data, const std::vector<int>& rows, double arm) {
  std::vector<int> out;
  for (int r : rows)
    if (data.treatment[r] == arm) out.push_back(r);
  return out;
}

}  // namespace

NuisanceSet fit_task_nuisances(const TaskDataset& data, ModelKind model,
                               const NuisanceLearnerSpec& spec, const std::vector<int>& train_rows,
                               std::pair<double, double> clip, Rng& rng) {
  if (train_rows.empty()) throw Error(Errc::empty_data, "fit_task_nuisances: empty training fold");
  NuisanceSet fits;
  switch (model) {
    case ModelKind::plm: {
      fits["h"] = fit_regressor(spec, data.covariates, data.treatment, train_rows, rng);
      fits["m"] = fit_regressor(spec, data.covariates, data.outcome, train_rows, rng);
      break;
    }
    case ModelKind::ate: {
      fits["pi"] = fit_classifier(spec, data.covariates, data.treatment, clip, train_rows, rng);
      const auto treated = arm_rows(data, train_rows, 1.0);
      const auto control = arm_rows(data, train_rows, 0.0);
      if (treated.empty())
        throw Error(Errc::no_treated_rows,
                    "task " + std::to_string(data.task_id) + ": no treated rows in training fold");
      if (control.empty())
        throw Error(Errc::no_control_rows,
                    "task " + std::to_string(data.task_id) + ": no control rows in training fold");
      fits["m1"] = fit_regressor(spec, data.covariates, data.outcome, treated, rng);
      fits["m0"] = fit_regressor(spec, data.covariates, data.outcome, control, rng);
      break;
    }
    case ModelKind::did: {
      fits["pi"] = fit_classifier(spec, data.covariates, data.treatment, clip, train_rows, rng);
      const auto control = arm_rows(data, train_rows, 0.0);
      if (control.empty())
        throw Error(Errc::no_control_rows,
                    "task " + std::to_string(data.task_id) + ": no control rows in training fold");
      Vec dy(data.n());
      for (int i = 0; i < data.n(); ++i) dy[i] = data.outcome[i] - data.outcome_pre[i];
      fits["m"] = fit_regressor(spec, data.covariates, dy, control, rng);
      break;
    }
  }
  return fits;
}

std::map<std::string, Vec> predict_all(const NuisanceSet& fits, const Matrix& x) {
  std::map<std::string, Vec> preds;
  for (const auto& [name, fit] : fits) preds[name] = predict(fit, x);
  return preds;
}

}  // namespace orthofuse
