#include "orthofuse/weights.hpp"

#include <algorithm>
#include <cmath>

#include "orthofuse/errors.hpp"
#include "orthofuse/loss.hpp"
#include "orthofuse/nuisance.hpp"

namespace orthofuse {

void PenaltyMatrix::set(int j, int k, double lambda, double weight, PenaltyProvenance p) {
  lambda_[idx(j, k)] = lambda_[idx(k, j)] = lambda;
  weight_[idx(j, k)] = weight_[idx(k, j)] = weight;
  prov_[idx(j, k)] = prov_[idx(k, j)] = p;
}

Vec fit_pilot(const TaskDataset& data, ModelKind model, const NuisanceLearnerSpec& learner,
              std::pair<double, double> clip, Rng& rng) {
  if (data.n() < 4)
    throw Error(Errc::too_few_observations, "pilot fit needs at least 4 observations");
  const auto rows = all_rows(data);
  const NuisanceSet fits = fit_task_nuisances(data, model, learner, rows, clip, rng);
  const auto preds = predict_all(fits, data.covariates);
  TaskLoss loss;
  switch (model) {
    case ModelKind::plm:
      loss = build_plm_loss(data, preds.at("h"), preds.at("m"), rows);
      break;
    case ModelKind::ate:
      loss = build_ate_loss(data, preds.at("pi"), preds.at("m1"), preds.at("m0"), rows);
      break;
    case ModelKind::did:
      loss = build_did_loss(data, preds.at("pi"), preds.at("m"), rows, rows);
      break;
  }
  return loss.quad.minimizer();
}

PenaltyMatrix compute_weights(const PilotEstimates& pilots, const FusionHyperparams& hp) {
  const int m = pilots.count();
  if (m < 2) throw Error(Errc::single_element, "need at least two tasks to fuse");
  PenaltyMatrix pen(m);
  for (int j = 0; j < m; ++j) {
    for (int k = j + 1; k < m; ++k) {
      const double dist = norm2(pilots.theta_init[j] - pilots.theta_init[k]);
      const double w =
          dist == 0.0 ? hp.w_cap : std::min(hp.c_w * std::pow(dist, -hp.gamma), hp.w_cap);
      if (w <= hp.tau)
        pen.set(j, k, hp.eps_n, w, PenaltyProvenance::floor);
      else
        pen.set(j, k, w, w, PenaltyProvenance::adaptive);
    }
  }
  return pen;
}

PenaltyMatrix uniform_penalty(int m, double lambda) {
  if (lambda < 0) throw Error(Errc::invalid_spec, "uniform penalty must be nonnegative");
  PenaltyMatrix pen(m);
  for (int j = 0; j < m; ++j)
    for (int k = j + 1; k < m; ++k) pen.set(j, k, lambda, lambda, PenaltyProvenance::adaptive);
  return pen;
}

}  // namespace orthofuse
