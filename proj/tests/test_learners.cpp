#include <cmath>
#include <doctest.h>

#include "orthofuse/errors.hpp"
#include "orthofuse/learners.hpp"
#include "orthofuse/stats.hpp"

using namespace orthofuse;

namespace {

std::vector<int> range_rows(int n) {
  std::vector<int> r(n);
  for (int i = 0; i < n; ++i) r[i] = i;
  return r;
}

Matrix random_matrix(int n, int p, Rng& rng) {
  Matrix x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = rng.next_normal();
  return x;
}

}  // namespace

TEST_SUITE("learners") {

TEST_CASE("constant regressor predicts the mean") {
  NuisanceLearnerSpec spec;
  spec.kind = LearnerKind::constant;
  Rng rng(1, 0);
  Matrix x(3, 1);
  const NuisanceFit fit = fit_regressor(spec, x, {1, 2, 3}, range_rows(3), rng);
  const Vec pred = predict(fit, x);
  for (double v : pred) CHECK(v == doctest::Approx(2.0));
}

TEST_CASE("ridge with huge penalty shrinks to the mean") {
  NuisanceLearnerSpec spec;
  spec.kind = LearnerKind::ridge;
  spec.l2_penalty = 1e12;
  Rng rng(2, 0);
  const Matrix x = random_matrix(200, 3, rng);
  Vec y(200);
  for (int i = 0; i < 200; ++i) y[i] = 2.0 * x(i, 0) + rng.next_normal();
  const NuisanceFit fit = fit_regressor(spec, x, y, range_rows(200), rng);
  const Vec pred = predict(fit, x);
  const double ybar = mean(y);
  for (double v : pred) CHECK(v == doctest::Approx(ybar).epsilon(1e-6));
}

TEST_CASE("ridge with small penalty recovers a linear slope") {
  NuisanceLearnerSpec spec;
  spec.kind = LearnerKind::ridge;
  spec.l2_penalty = 1e-6;
  Rng rng(3, 0);
  const Matrix x = random_matrix(500, 2, rng);
  Vec y(500);
  for (int i = 0; i < 500; ++i) y[i] = 1.5 * x(i, 0) - 0.5 * x(i, 1);
  const NuisanceFit fit = fit_regressor(spec, x, y, range_rows(500), rng);
  CHECK(fit.ridge_beta[0] == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(fit.ridge_beta[1] == doctest::Approx(-0.5).epsilon(1e-6));
}

TEST_CASE("single stump fits a threshold function") {
  NuisanceLearnerSpec spec;
  spec.kind = LearnerKind::gbt_regressor;
  spec.trees = 1;
  spec.max_depth = 1;
  spec.learning_rate = 1.0;
  spec.min_leaf = 5;
  Rng rng(4, 0);
  const int n = 1000;
  const Matrix x = random_matrix(n, 3, rng);
  Vec y(n);
  for (int i = 0; i < n; ++i) y[i] = x(i, 0) > 0 ? 1.0 : 0.0;
  const NuisanceFit fit = fit_regressor(spec, x, y, range_rows(n), rng);
  const Vec pred = predict(fit, x);
  double mse = 0;
  for (int i = 0; i < n; ++i) mse += (pred[i] - y[i]) * (pred[i] - y[i]);
  mse /= n;
  CHECK(mse < 0.05);
}

TEST_CASE("training mse never exceeds target variance") {
  NuisanceLearnerSpec spec;
  Rng rng(5, 0);
  const int n = 400;
  const Matrix x = random_matrix(n, 4, rng);
  Vec y(n);
  for (int i = 0; i < n; ++i) y[i] = std::sin(x(i, 0)) + 0.3 * rng.next_normal();
  const NuisanceFit fit = fit_regressor(spec, x, y, range_rows(n), rng);
  const Vec pred = predict(fit, x);
  double mse = 0;
  for (int i = 0; i < n; ++i) mse += (pred[i] - y[i]) * (pred[i] - y[i]);
  mse /= n;
  CHECK(mse <= variance(y) + 1e-12);
}

TEST_CASE("stagewise training loss is non-increasing") {
  NuisanceLearnerSpec spec;
  spec.trees = 60;
  Rng rng(6, 0);
  const int n = 300;
  const Matrix x = random_matrix(n, 3, rng);
  Vec y(n), d(n);
  for (int i = 0; i < n; ++i) {
    y[i] = x(i, 0) * x(i, 1) + rng.next_normal();
    d[i] = rng.next_bernoulli(1.0 / (1.0 + std::exp(-x(i, 0)))) ? 1.0 : 0.0;
  }
  const NuisanceFit reg = fit_regressor(spec, x, y, range_rows(n), rng);
  for (std::size_t t = 1; t < reg.gbt->train_curve.size(); ++t)
    CHECK(reg.gbt->train_curve[t] <= reg.gbt->train_curve[t - 1] + 1e-12);
  const NuisanceFit clf = fit_classifier(spec, x, d, {0.05, 0.95}, range_rows(n), rng);
  for (std::size_t t = 1; t < clf.gbt->train_curve.size(); ++t)
    CHECK(clf.gbt->train_curve[t] <= clf.gbt->train_curve[t - 1] + 1e-9);
}

TEST_CASE("degenerate single-class target gives clipped frequency") {
  NuisanceLearnerSpec spec;
  Rng rng(7, 0);
  Matrix x(20, 2);
  const NuisanceFit fit = fit_classifier(spec, x, Vec(20, 1.0), {0.05, 0.95}, range_rows(20), rng);
  CHECK(!fit.warning.empty());
  const Vec pred = predict(fit, x);
  for (double v : pred) CHECK(v == doctest::Approx(0.95));
}

TEST_CASE("trees=0 is rejected") {
  NuisanceLearnerSpec spec;
  spec.trees = 0;
  Rng rng(8, 0);
  Matrix x(10, 1);
  CHECK_THROWS_AS(fit_regressor(spec, x, Vec(10, 0.0), range_rows(10), rng), Error);
}

TEST_CASE("no-signal classifier is roughly calibrated") {
  NuisanceLearnerSpec spec;
  Rng rng(9, 0);
  const int n = 2000;
  const Matrix x = random_matrix(n, 4, rng);
  Vec d(n);
  for (int i = 0; i < n; ++i) d[i] = rng.next_bernoulli(0.5) ? 1.0 : 0.0;
  const NuisanceFit fit = fit_classifier(spec, x, d, {0.05, 0.95}, range_rows(n), rng);
  const double m = mean(predict(fit, x));
  CHECK(m >= 0.45);
  CHECK(m <= 0.55);
}

TEST_CASE("classifier outputs respect the clip bounds") {
  NuisanceLearnerSpec spec;
  spec.trees = 40;
  Rng rng(10, 0);
  const int n = 600;
  const Matrix x = random_matrix(n, 3, rng);
  Vec d(n);
  for (int i = 0; i < n; ++i) d[i] = x(i, 0) > 0.5 ? 1.0 : 0.0;  // strong signal
  const NuisanceFit fit = fit_classifier(spec, x, d, {0.1, 0.9}, range_rows(n), rng);
  Rng rng2(11, 0);
  const Vec pred = predict(fit, random_matrix(500, 3, rng2));
  for (double v : pred) {
    CHECK(v >= 0.1);
    CHECK(v <= 0.9);
  }
}

TEST_CASE("predict on training data is deterministic") {
  NuisanceLearnerSpec spec;
  Rng rng(12, 0);
  const Matrix x = random_matrix(150, 3, rng);
  Vec y(150);
  for (int i = 0; i < 150; ++i) y[i] = x(i, 1) + rng.next_normal();
  const NuisanceFit fit = fit_regressor(spec, x, y, range_rows(150), rng);
  CHECK(predict(fit, x) == predict(fit, x));
}

TEST_CASE("feature count mismatch is rejected") {
  NuisanceLearnerSpec spec;
  Rng rng(13, 0);
  const Matrix x = random_matrix(50, 3, rng);
  Vec y(50, 1.0);
  y[0] = 0.0;
  const NuisanceFit fit = fit_regressor(spec, x, y, range_rows(50), rng);
  const Matrix bad = random_matrix(5, 2, rng);
  CHECK_THROWS_AS(predict(fit, bad), Error);
}

}  // TEST_SUITE
