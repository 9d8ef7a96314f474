#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <limits>

#include "orthofuse/errors.hpp"
#include "orthofuse/solver.hpp"

using namespace orthofuse;

namespace {

SmoothLossOracle scalar_quad(double a, double b_min) {
  // a * (theta - b_min)^2 in coefficient form
  QuadraticLoss q;
  q.A = Matrix(1, 1);
  q.A(0, 0) = a;
  q.b = {a * b_min};
  q.c = a * b_min * b_min;
  q.n_eff = 1;
  return SmoothLossOracle::from_quadratic(q);
}

// Multiscale grid refinement for scalar instances: with a convex objective
// the best grid point stays within one cell of the argmin, so shrinking the
// box around it converges to the global minimizer. Used as an independent
// optimization oracle.
struct GridOracle {
  Vec argmin;
  double value = 0;
};

GridOracle grid_search(const std::vector<SmoothLossOracle>& losses, const PenaltyMatrix& pen,
                       double lo, double hi, double final_step) {
  const int m = static_cast<int>(losses.size());
  Vec center(m, 0.5 * (lo + hi));
  double half = 0.5 * (hi - lo);
  GridOracle best;
  best.value = std::numeric_limits<double>::infinity();
  const int points = 13;
  while (true) {
    const double step = 2.0 * half / (points - 1);
    std::vector<int> idx(m, 0);
    Vec theta(m);
    for (;;) {
      for (int j = 0; j < m; ++j) theta[j] = center[j] - half + idx[j] * step;
      std::vector<Vec> as_vecs(m);
      for (int j = 0; j < m; ++j) as_vecs[j] = {theta[j]};
      const double v = fused_objective(losses, pen, as_vecs);
      if (v < best.value) {
        best.value = v;
        best.argmin = theta;
      }
      int k = 0;
      while (k < m && ++idx[k] == points) idx[k++] = 0;
      if (k == m) break;
    }
    if (step <= final_step) break;
    center = best.argmin;
    half = 2.0 * step;
  }
  return best;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("group soft threshold") {
  CHECK(group_soft_threshold({3.0, 4.0}, 10.0) == Vec{0.0, 0.0});
  const Vec s = group_soft_threshold({3.0, 4.0}, 2.5);
  CHECK(s[0] == doctest::Approx(1.5));
  CHECK(s[1] == doctest::Approx(2.0));
  CHECK(group_soft_threshold({3.0, 4.0}, 0.0) == Vec{3.0, 4.0});
}

TEST_CASE("prox satisfies the subgradient optimality condition") {
  Rng rng(500, 0);
  for (int t = 0; t < 200; ++t) {
    const int d = 1 + static_cast<int>(rng.next_below(4));
    Vec v(d);
    for (double& x : v) x = 3.0 * rng.next_normal();
    const double kappa = 2.0 * rng.next_double();
    const Vec z = group_soft_threshold(v, kappa);
    const double nz = norm2(z);
    if (nz == 0.0) {
      // 0 is optimal iff ||v|| <= kappa
      CHECK(norm2(v) <= kappa + 1e-12);
    } else {
      // kappa z/||z|| + z - v = 0
      for (int i = 0; i < d; ++i)
        CHECK(kappa * z[i] / nz + z[i] - v[i] == doctest::Approx(0.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("zero penalty decouples the tasks") {
  const std::vector<SmoothLossOracle> losses{scalar_quad(1.0, 0.0), scalar_quad(1.0, 1.0)};
  const FusionSolution sol = solve_fused(losses, uniform_penalty(2, 0.0), SolverConfig{});
  CHECK(sol.converged);
  CHECK(sol.theta_hat[0][0] == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(sol.theta_hat[1][0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sol.partition.size() == 2);
}

TEST_CASE("huge penalty forces consensus at the pooled minimizer") {
  const std::vector<SmoothLossOracle> losses{scalar_quad(1.0, 0.0), scalar_quad(1.0, 1.0)};
  const FusionSolution sol = solve_fused(losses, uniform_penalty(2, 100.0), SolverConfig{});
  CHECK(sol.converged);
  CHECK(sol.theta_hat[0][0] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(sol.theta_hat[0][0] == sol.theta_hat[1][0]);
  CHECK(sol.partition.size() == 1);
}

TEST_CASE("intermediate penalty shrinks without fusing") {
  const std::vector<SmoothLossOracle> losses{scalar_quad(1.0, 0.0), scalar_quad(1.0, 1.0)};
  const FusionSolution sol = solve_fused(losses, uniform_penalty(2, 0.4), SolverConfig{});
  CHECK(sol.converged);
  // stationarity: 2 theta1 = lambda, 2(theta2 - 1) = -lambda
  CHECK(sol.theta_hat[0][0] == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(sol.theta_hat[1][0] == doctest::Approx(0.8).epsilon(1e-6));
  CHECK(sol.partition.size() == 2);
}

TEST_CASE("adaptive penalties fuse the near pair and isolate the far task") {
  const std::vector<SmoothLossOracle> losses{scalar_quad(1.0, 0.0), scalar_quad(1.0, 0.01),
                                             scalar_quad(1.0, 1.0)};
  PilotEstimates pilots;
  pilots.theta_init = {{0.0}, {0.01}, {1.0}};
  const PenaltyMatrix pen = compute_weights(pilots, FusionHyperparams{});
  const FusionSolution sol = solve_fused(losses, pen, SolverConfig{});
  REQUIRE(sol.partition.size() == 2);
  CHECK(sol.partition[0] == std::vector<int>{0, 1});
  CHECK(sol.partition[1] == std::vector<int>{2});
  CHECK(sol.theta_hat[0][0] == sol.theta_hat[1][0]);
  CHECK(sol.theta_hat[0][0] == doctest::Approx(0.005).epsilon(1e-4));
  // verified against the refinement oracle as well
  std::vector<SmoothLossOracle> copy(losses);
  const GridOracle oracle = grid_search(copy, pen, -0.5, 1.5, 1e-4);
  CHECK(sol.objective_value <= oracle.value + 1e-5);
}

TEST_CASE("partition extraction uses component closure and snaps estimates") {
  std::vector<Vec> theta{{1.0}, {1.0 + 1e-9}, {1.0 - 1e-9}, {5.0}};
  std::vector<EdgeVar> edges;
  EdgeVar e01{0, 1, {0.0}, {0.0}, 1.0, false};
  EdgeVar e12{1, 2, {0.0}, {0.0}, 1.0, false};
  EdgeVar e02{0, 2, {0.5}, {0.0}, 1.0, false};  // not thresholded to zero
  EdgeVar e03{0, 3, {0.7}, {0.0}, 1.0, false};
  edges = {e01, e12, e02, e03};
  const auto partition = extract_partition(theta, edges, SolverConfig{});
  REQUIRE(partition.size() == 2);
  CHECK(partition[0] == std::vector<int>{0, 1, 2});
  CHECK(partition[1] == std::vector<int>{3});
  // snap makes members exactly equal
  CHECK(theta[0] == theta[1]);
  CHECK(theta[1] == theta[2]);
}

TEST_CASE("all edges zero collapse to a single cluster and none to singletons") {
  std::vector<Vec> theta{{1.0}, {1.0}, {1.0}};
  std::vector<EdgeVar> all_zero{{0, 1, {0.0}, {0.0}, 1, false},
                                {0, 2, {0.0}, {0.0}, 1, false},
                                {1, 2, {0.0}, {0.0}, 1, false}};
  CHECK(extract_partition(theta, all_zero, SolverConfig{}).size() == 1);

  std::vector<Vec> theta2{{1.0}, {2.0}, {3.0}};
  std::vector<EdgeVar> none{{0, 1, {1.0}, {0.0}, 1, false},
                            {0, 2, {2.0}, {0.0}, 1, false},
                            {1, 2, {1.0}, {0.0}, 1, false}};
  CHECK(extract_partition(theta2, none, SolverConfig{}).size() == 3);
}

TEST_CASE("refit returns pooled minimizers") {
  const std::vector<SmoothLossOracle> losses{scalar_quad(1.0, 0.0), scalar_quad(1.0, 1.0)};
  // singleton clusters: personal minimizers
  const auto singletons = refit_clusters(losses, {{0}, {1}});
  CHECK(singletons[0][0] == doctest::Approx(0.0));
  CHECK(singletons[1][0] == doctest::Approx(1.0));
  // pooled: mean
  const auto pooled = refit_clusters(losses, {{0, 1}});
  CHECK(pooled[0][0] == doctest::Approx(0.5));
  // weighted pooling: A1=1,b1=0 and A2=3,b2=3 -> 0.75
  QuadraticLoss q1, q2;
  q1.A = Matrix(1, 1);
  q1.A(0, 0) = 1;
  q1.b = {0.0};
  q2.A = Matrix(1, 1);
  q2.A(0, 0) = 3;
  q2.b = {3.0};
  const auto weighted = refit_clusters(
      {SmoothLossOracle::from_quadratic(q1), SmoothLossOracle::from_quadratic(q2)}, {{0, 1}});
  CHECK(weighted[0][0] == doctest::Approx(0.75));
}

TEST_CASE("lambda zero equals closed-form minimizers for random instances") {
  Rng rng(501, 0);
  for (int t = 0; t < 50; ++t) {
    const int m = 2 + static_cast<int>(rng.next_below(3));
    std::vector<SmoothLossOracle> losses;
    Vec expect(m);
    for (int j = 0; j < m; ++j) {
      const double a = 0.5 + 3.5 * rng.next_double();
      const double b = 4.0 * rng.next_normal();
      expect[j] = b;
      losses.push_back(scalar_quad(a, b));
    }
    const FusionSolution sol = solve_fused(losses, uniform_penalty(m, 0.0), SolverConfig{});
    for (int j = 0; j < m; ++j)
      CHECK(std::fabs(sol.theta_hat[j][0] - expect[j]) <= 1e-8);
  }
}

TEST_CASE("solver matches the grid oracle on random scalar instances") {
  Rng rng(502, 0);
  for (int t = 0; t < 40; ++t) {
    const int m = 2 + static_cast<int>(rng.next_below(3));
    std::vector<SmoothLossOracle> losses;
    double lo = 1e300, hi = -1e300;
    for (int j = 0; j < m; ++j) {
      const double a = 0.5 + 3.5 * rng.next_double();
      const double b = 2.0 * rng.next_normal();
      lo = std::min(lo, b);
      hi = std::max(hi, b);
      losses.push_back(scalar_quad(a, b));
    }
    const PenaltyMatrix pen = uniform_penalty(m, 5.0 * rng.next_double());
    const FusionSolution sol = solve_fused(losses, pen, SolverConfig{});
    const GridOracle oracle = grid_search(losses, pen, lo - 0.5, hi + 0.5, 2e-5);
    CHECK(sol.objective_value <= oracle.value + 1e-5);
    for (int j = 0; j < m; ++j)
      CHECK(std::fabs(sol.theta_hat[j][0] - oracle.argmin[j]) <= 2e-4);
  }
}

TEST_CASE("permutation equivariance") {
  Rng rng(503, 0);
  std::vector<SmoothLossOracle> losses{scalar_quad(1.2, -0.4), scalar_quad(0.7, -0.38),
                                       scalar_quad(2.0, 0.9), scalar_quad(1.1, 0.95)};
  PilotEstimates pilots;
  pilots.theta_init = {{-0.4}, {-0.38}, {0.9}, {0.95}};
  const PenaltyMatrix pen = compute_weights(pilots, FusionHyperparams{});
  const FusionSolution base = solve_fused(losses, pen, SolverConfig{});

  const std::vector<int> perm{2, 0, 3, 1};
  std::vector<SmoothLossOracle> permuted;
  PilotEstimates ppilots;
  for (int j : perm) {
    permuted.push_back(losses[j]);
    ppilots.theta_init.push_back(pilots.theta_init[j]);
  }
  const PenaltyMatrix ppen = compute_weights(ppilots, FusionHyperparams{});
  const FusionSolution psol = solve_fused(permuted, ppen, SolverConfig{});
  for (std::size_t i = 0; i < perm.size(); ++i)
    CHECK(psol.theta_hat[i][0] == doctest::Approx(base.theta_hat[perm[i]][0]).epsilon(1e-6));
  // same partition as sets of original indices
  auto canon = [&](const std::vector<std::vector<int>>& part, const std::vector<int>& map) {
    std::vector<std::vector<int>> out;
    for (auto c : part) {
      for (int& x : c) x = map[x];
      std::sort(c.begin(), c.end());
      out.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  std::vector<int> identity{0, 1, 2, 3};
  CHECK(canon(base.partition, identity) == canon(psol.partition, perm));
}

TEST_CASE("iteration cap returns the best iterate unconverged") {
  SolverConfig cfg;
  cfg.max_iter = 1;
  const std::vector<SmoothLossOracle> losses{scalar_quad(1.0, 0.0), scalar_quad(1.0, 1.0)};
  const FusionSolution sol = solve_fused(losses, uniform_penalty(2, 0.7), cfg);
  CHECK(!sol.converged);
  CHECK(sol.iterations == 1);
  CHECK(std::isfinite(sol.objective_value));
  // the same instance converges to the interior stationary point when uncapped
  SolverConfig full;
  const FusionSolution ref = solve_fused(losses, uniform_penalty(2, 0.7), full);
  CHECK(ref.converged);
  CHECK(sol.objective_value >= ref.objective_value);
}

TEST_CASE("incumbent objective is reported and consistent") {
  const std::vector<SmoothLossOracle> losses{scalar_quad(1.5, -1.0), scalar_quad(0.6, 2.0),
                                             scalar_quad(1.0, 0.5)};
  const PenaltyMatrix pen = uniform_penalty(3, 0.3);
  const FusionSolution sol = solve_fused(losses, pen, SolverConfig{});
  CHECK(sol.objective_value ==
        doctest::Approx(fused_objective(losses, pen, sol.theta_hat)).epsilon(1e-12));
}

TEST_CASE("general smooth losses take the newton path") {
  // smooth strictly convex non-quadratic: cosh-style losses
  auto make = [](double center) {
    return SmoothLossOracle(1, 1, true, [center](const Vec& th, double* v, Vec* g, Matrix* h) {
      const double x = th[0] - center;
      if (v) *v = std::cosh(x);
      if (g) *g = {std::sinh(x)};
      if (h) {
        Matrix m(1, 1);
        m(0, 0) = std::cosh(x);
        *h = m;
      }
    });
  };
  const std::vector<SmoothLossOracle> losses{make(0.0), make(1.0)};
  const FusionSolution forced = solve_fused(losses, uniform_penalty(2, 50.0), SolverConfig{});
  CHECK(forced.theta_hat[0][0] == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(forced.partition.size() == 1);
  const FusionSolution off = solve_fused(losses, uniform_penalty(2, 0.0), SolverConfig{});
  CHECK(off.theta_hat[0][0] == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(off.theta_hat[1][0] == doctest::Approx(1.0).epsilon(1e-6));
}

}  // TEST_SUITE
