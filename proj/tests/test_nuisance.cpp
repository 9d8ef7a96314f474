#include <algorithm>
#include <cmath>
#include <doctest.h>

#include "orthofuse/errors.hpp"
#include "orthofuse/nuisance.hpp"
#include "orthofuse/simulate.hpp"

using namespace orthofuse;

namespace {

NuisanceLearnerSpec quick_spec() {
  NuisanceLearnerSpec s;
  s.trees = 10;
  s.min_leaf = 5;
  return s;
}

TaskDataset sim_task(ModelKind model, int n = 120, std::uint64_t seed = 3) {
  DgpConfig cfg;
  cfg.model = model;
  cfg.m = 1;
  cfg.K = 1;
  cfg.n0 = n - cfg.n_step;  // n_j(1) == n
  cfg.p0 = 5;
  cfg.p_step = 0;
  Rng truth_rng(seed, 0);
  const SimTruth truth = assign_clusters(cfg, truth_rng);
  Rng rng(seed, 1);
  return generate_task(cfg, truth, 1, rng);
}

}  // namespace

TEST_SUITE("nuisance") {

TEST_CASE("plm nuisances train only on the designated fold") {
  TaskDataset data = sim_task(ModelKind::plm);
  Rng split_rng(1, 2);
  data = split_dataset(std::move(data), 2, split_rng);
  Rng rng(1, 3);
  const auto fits =
      fit_task_nuisances(data, ModelKind::plm, quick_spec(), fold_rows(data, 0), {0.05, 0.95}, rng);
  REQUIRE(fits.count("h") == 1);
  REQUIRE(fits.count("m") == 1);
  for (const auto& [name, fit] : fits) {
    CHECK(fit.trained_rows == fold_rows(data, 0));
    for (int r : fit.trained_rows)
      CHECK(std::find(data.folds[1].begin(), data.folds[1].end(), r) == data.folds[1].end());
  }
}

TEST_CASE("ate nuisance set splits arms and validates them") {
  TaskDataset data = sim_task(ModelKind::ate, 200);
  Rng rng(2, 0);
  const auto rows = all_rows(data);
  const auto fits = fit_task_nuisances(data, ModelKind::ate, quick_spec(), rows, {0.05, 0.95}, rng);
  REQUIRE(fits.count("pi") == 1);
  for (int r : fits.at("m1").trained_rows) CHECK(data.treatment[r] == 1.0);
  for (int r : fits.at("m0").trained_rows) CHECK(data.treatment[r] == 0.0);

  // all-treated fold has no control rows
  TaskDataset degen = data;
  for (double& d : degen.treatment) d = 1.0;
  try {
    fit_task_nuisances(degen, ModelKind::ate, quick_spec(), rows, {0.05, 0.95}, rng);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::no_control_rows);
  }
}

TEST_CASE("did outcome-trend fit uses only control rows") {
  TaskDataset data = sim_task(ModelKind::did, 200);
  Rng rng(3, 0);
  const auto fits =
      fit_task_nuisances(data, ModelKind::did, quick_spec(), all_rows(data), {0.05, 0.95}, rng);
  REQUIRE(fits.count("m") == 1);
  CHECK(!fits.at("m").trained_rows.empty());
  for (int r : fits.at("m").trained_rows) CHECK(data.treatment[r] == 0.0);
}

TEST_CASE("predictions are finite across the nuisance set") {
  TaskDataset data = sim_task(ModelKind::ate, 150);
  Rng rng(4, 0);
  const auto fits =
      fit_task_nuisances(data, ModelKind::ate, quick_spec(), all_rows(data), {0.05, 0.95}, rng);
  const auto preds = predict_all(fits, data.covariates);
  for (const auto& [name, vec] : preds) {
    CHECK(static_cast<int>(vec.size()) == data.n());
    for (double v : vec) CHECK(std::isfinite(v));
  }
  for (double v : preds.at("pi")) {
    CHECK(v >= 0.05);
    CHECK(v <= 0.95);
  }
}

}  // TEST_SUITE
