#ifndef ORTHOFUSE_INFERENCE_HPP_
#define ORTHOFUSE_INFERENCE_HPP_

#include <vector>

#include "orthofuse/linalg.hpp"
#include "orthofuse/loss.hpp"

namespace orthofuse {

//! Pooled sandwich inference for one recovered cluster.
struct ClusterInference {
  int cluster_id = 0;
  std::vector<int> members;
  long long n_pooled = 0;   // N_k, total loss observations across members
  Vec estimate;
  Matrix psi_hat;           // pooled Hessian / N_k
  Matrix omega_hat;         // pooled score outer product / N_k
  Vec se;
  Vec ci_lo, ci_hi;
  double level = 0.95;
};

//! Cluster-pooled sandwich variance Psi^{-1} Omega Psi^{-1} / N_k with
//! per-observation scores and Hessians evaluated at the fused estimate, and
//! the matching Wald intervals.
std::vector<ClusterInference> sandwich_inference(const std::vector<std::vector<int>>& partition,
                                                 const std::vector<TaskLoss>& losses,
                                                 const std::vector<Vec>& theta_hat, double level);

//! Z_j = (theta_hat_j - theta_star_j) / se_j for QQ diagnostics (scalar
//! targets; simulation-only since it needs the truth).
Vec standardize_estimates(const Vec& theta_hat, const Vec& theta_star, const Vec& se_per_task);

}  // namespace orthofuse

#endif  // ORTHOFUSE_INFERENCE_HPP_
