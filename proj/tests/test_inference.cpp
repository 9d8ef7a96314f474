#include <cmath>
#include <doctest.h>

#include "orthofuse/errors.hpp"
#include "orthofuse/inference.hpp"
#include "orthofuse/pipeline.hpp"
#include "orthofuse/simulate.hpp"
#include "orthofuse/stats.hpp"

using namespace orthofuse;

namespace {

// task loss sum_i (theta - y_i)^2 in per-observation form
TaskLoss mean_loss(const Vec& y) {
  TaskLoss loss;
  const int n = static_cast<int>(y.size());
  loss.quad.A = Matrix(1, 1);
  loss.quad.A(0, 0) = n;
  loss.quad.b = {0.0};
  loss.obs.dim = 1;
  loss.obs.a.assign(n, 1.0);
  for (double v : y) {
    loss.quad.b[0] += v;
    loss.quad.c += v * v;
    loss.obs.b.push_back(v);
  }
  loss.quad.n_eff = n;
  return loss;
}

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("hand-computed sandwich for a two-point cluster") {
  const TaskLoss loss = mean_loss({0.0, 2.0});
  const auto cis = sandwich_inference({{0}}, {loss}, {{1.0}}, 0.95);
  REQUIRE(cis.size() == 1);
  const ClusterInference& ci = cis[0];
  CHECK(ci.n_pooled == 2);
  CHECK(ci.psi_hat(0, 0) == doctest::Approx(2.0));
  CHECK(ci.omega_hat(0, 0) == doctest::Approx(4.0));
  CHECK(ci.se[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  const double z = norm_ppf(0.975);
  CHECK(ci.ci_lo[0] == doctest::Approx(1.0 - z * ci.se[0]));
  CHECK(ci.ci_hi[0] == doctest::Approx(1.0 + z * ci.se[0]));
  CHECK(ci.ci_lo[0] <= ci.estimate[0]);
  CHECK(ci.estimate[0] <= ci.ci_hi[0]);
}

TEST_CASE("zero residuals give a degenerate interval at the estimate") {
  const TaskLoss loss = mean_loss({1.0, 1.0, 1.0});
  const auto cis = sandwich_inference({{0}}, {loss}, {{1.0}}, 0.95);
  CHECK(cis[0].se[0] == 0.0);
  CHECK(cis[0].ci_lo[0] == 1.0);
  CHECK(cis[0].ci_hi[0] == 1.0);
}

TEST_CASE("psi and omega are symmetric and omega is psd") {
  Rng rng(600, 0);
  Vec y(40);
  for (double& v : y) v = rng.next_normal();
  const TaskLoss loss = mean_loss(y);
  const auto cis = sandwich_inference({{0}}, {loss}, {{mean(y)}}, 0.9);
  CHECK(cis[0].psi_hat(0, 0) == doctest::Approx(2.0));
  CHECK(cis[0].omega_hat(0, 0) >= 0.0);
}

TEST_CASE("empty cluster is rejected") {
  const TaskLoss loss = mean_loss({0.0, 1.0});
  CHECK_THROWS_AS(sandwich_inference({{}}, {loss}, {{0.5}}, 0.95), Error);
}

TEST_CASE("standardized estimates") {
  CHECK(standardize_estimates({1.0}, {1.0}, {0.1})[0] == doctest::Approx(0.0));
  CHECK(standardize_estimates({1.1}, {1.0}, {0.05})[0] == doctest::Approx(2.0));
  CHECK_THROWS_AS(standardize_estimates({1.0}, {0.0}, {0.0}), Error);
}

TEST_CASE("ci width shrinks like one over root n") {
  // doubling every member's data shrinks se by sqrt(2), within 15% over reps
  Rng rng(601, 0);
  std::vector<double> ratios;
  for (int rep = 0; rep < 50; ++rep) {
    Vec y1(80), y2(160);
    for (double& v : y1) v = rng.next_normal();
    for (double& v : y2) v = rng.next_normal();
    const TaskLoss l1 = mean_loss(y1);
    const TaskLoss l2 = mean_loss(y2);
    const double se1 = sandwich_inference({{0}}, {l1}, {{mean(y1)}}, 0.95)[0].se[0];
    const double se2 = sandwich_inference({{0}}, {l2}, {{mean(y2)}}, 0.95)[0].se[0];
    ratios.push_back(se1 / se2);
  }
  CHECK(mean(ratios) == doctest::Approx(std::sqrt(2.0)).epsilon(0.15));
}

TEST_CASE("pooled se beats each personalized se on a shared-target study") {
  DgpConfig cfg;
  cfg.model = ModelKind::plm;
  cfg.m = 3;
  cfg.K = 1;
  cfg.delta = 1.0;
  cfg.n0 = 150;
  cfg.n_step = 10;
  cfg.p0 = 5;
  cfg.p_step = 0;
  cfg.seed = 99;
  Rng truth_rng(cfg.seed, 0);
  const SimTruth truth = assign_clusters(cfg, truth_rng);
  std::vector<TaskDataset> tasks;
  for (int j = 1; j <= cfg.m; ++j) {
    Rng rng(cfg.seed, stream::data(0, j));
    tasks.push_back(generate_task(cfg, truth, j, rng));
  }
  PipelineConfig pipeline;
  pipeline.learner.trees = 25;
  const PreparedTasks prepared = prepare_tasks(tasks, pipeline, cfg.seed, 0);

  // pooled single cluster
  const auto pooled = sandwich_inference(
      {{0, 1, 2}}, prepared.losses,
      {Vec{truth.beta_star[0]}, Vec{truth.beta_star[0]}, Vec{truth.beta_star[0]}}, 0.95);
  // personalized singletons at their own minimizers
  for (int j = 0; j < 3; ++j) {
    const Vec own = prepared.losses[j].quad.minimizer();
    const auto solo = sandwich_inference({{j}}, prepared.losses, [&] {
      std::vector<Vec> th(3, Vec{0.0});
      th[j] = own;
      return th;
    }(), 0.95);
    CHECK(pooled[0].se[0] < solo[0].se[0]);
  }
}

}  // TEST_SUITE
