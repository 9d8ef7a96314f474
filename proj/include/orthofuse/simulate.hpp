#ifndef ORTHOFUSE_SIMULATE_HPP_
#define ORTHOFUSE_SIMULATE_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "orthofuse/dataset.hpp"
#include "orthofuse/pipeline.hpp"

namespace orthofuse {

//! Simulation design: m tasks in K latent clusters with centroid grid
//! beta_k = k*delta - (K+1)*delta/2 and size/dimension rules
//! n_j = n0 + n_step*j, p_j = p0 + p_step*j for 1-based task index j.
//! Defaults are desk scale; n0=3200, n_step=80 reproduce the full design.
struct DgpConfig {
  ModelKind model = ModelKind::plm;
  int m = 20;
  int K = 3;
  double delta = 1.0 / 3.0;
  double n0 = 400;
  double n_step = 10;
  int p0 = 5;
  int p_step = 1;
  double xi_max = 0.0;  // within-cluster perturbation radius
  std::uint64_t seed = 1;

  int n_j(int j) const { return static_cast<int>(n0 + n_step * j); }
  int p_j(int j) const { return p0 + p_step * j; }
  bool operator==(const DgpConfig&) const = default;
};

struct SimTruth {
  std::vector<int> cluster_of;  // m entries, 0-based cluster labels
  Vec beta_star;                // K centroids
  Vec theta_star;               // m per-task targets
};

// nonparametric pieces of the generating design, shared across tasks
double dgp_sigmoid(double x);
double dgp_h(const Matrix& x, int row);     // treatment mean, PLM
double dgp_g(const Matrix& x, int row);     // outcome mean shift
double dgp_pi(const Matrix& x, int row);    // propensity, clipped to [.05,.95]
double dgp_mu0(const Matrix& x, int row);   // DID pre-period trend
double dgp_mu1(const Matrix& x, int row);   // DID post-period trend

//! Uniform random cluster labels (redrawn while any cluster is empty, at
//! most 100 attempts) and targets beta_k plus a uniform draw from the
//! xi_max-ball.
SimTruth assign_clusters(const DgpConfig& cfg, Rng& rng);

//! One task's draw from the model's generating process (j is 1-based).
TaskDataset generate_task(const DgpConfig& cfg, const SimTruth& truth, int j, Rng& rng);

//! Per-row true nuisance predictions for the orthogonality diagnostic.
std::map<std::string, Vec> truth_predictions(const TaskDataset& data, ModelKind model,
                                             double theta_star);

double rmse(const std::vector<Vec>& theta_hat, const std::vector<Vec>& theta_star);
double wrmse(const std::vector<Vec>& theta_hat, const std::vector<Vec>& theta_star,
             const std::vector<double>& pooled_sizes);

//! Chance-corrected pair-counting agreement between two labelings.
double adjusted_rand_index(const std::vector<int>& labels_true, const std::vector<int>& labels_est);

struct RepRecord {
  int rep = 0;
  std::string method;
  int task = 0;  // 1-based
  int cluster_true = 0;
  int cluster_est = 0;
  double theta_true = 0;
  double theta_hat = 0;
  double se = 0;
};

struct MethodSummary {
  std::string method;
  double rmse_mean = 0, rmse_median = 0;
  double wrmse_mean = 0, wrmse_median = 0;
  double ari_mean = 0, ari_median = 0;
  double coverage = 0;  // share of (rep, task) with theta* inside the Wald CI
};

struct MetricsReport {
  std::vector<MethodSummary> methods;
  int completed_reps = 0;
  std::vector<int> failed_reps;  // replication ids that failed twice
};

struct MonteCarloResult {
  std::vector<RepRecord> records;  // ordered by (rep, method, task)
  MetricsReport report;
};

//! Worker count for replication fan-out: ORTHOFUSE_THREADS when set, else
//! the hardware concurrency.
int default_thread_count();

//! Runs every method through the shared two-stage pipeline on common draws,
//! one independent stream set per replication. Deterministic for a fixed
//! config regardless of the worker count. Failed replications are retried
//! once on a fresh stream and recorded if they fail again.
MonteCarloResult run_monte_carlo(const DgpConfig& cfg, const std::vector<MethodSpec>& methods,
                                 int reps, const PipelineConfig& pipeline, int threads = 0);

}  // namespace orthofuse

#endif  // ORTHOFUSE_SIMULATE_HPP_
