#include "orthofuse/inference.hpp"

#include <cmath>

#include "orthofuse/errors.hpp"
#include "orthofuse/stats.hpp"

namespace orthofuse {

std::vector<ClusterInference> sandwich_inference(const std::vector<std::vector<int>>& partition,
                                                 const std::vector<TaskLoss>& losses,
                                                 const std::vector<Vec>& theta_hat, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw Error(Errc::invalid_spec, "confidence level must lie in (0,1)");
  const double z = norm_ppf(1.0 - (1.0 - level) / 2.0);

  std::vector<ClusterInference> out;
  out.reserve(partition.size());
  for (std::size_t k = 0; k < partition.size(); ++k) {
    const auto& members = partition[k];
    if (members.empty()) throw Error(Errc::empty_cluster, "sandwich inference: empty cluster");
    const int d = static_cast<int>(theta_hat[members[0]].size());

    ClusterInference ci;
    ci.cluster_id = static_cast<int>(k);
    ci.members = members;
    ci.level = level;
    ci.estimate = theta_hat[members[0]];
    ci.psi_hat = Matrix(d, d);
    ci.omega_hat = Matrix(d, d);

    long long n_total = 0;
    for (int j : members) {
      const PerObsQuadratic& obs = losses[j].obs;
      const Vec& theta = theta_hat[j];
      n_total += obs.count();
      for (int i = 0; i < obs.count(); ++i) {
        ci.psi_hat += obs.hessian(i);
        add_outer(ci.omega_hat, obs.score(i, theta), 1.0);
      }
    }
    if (n_total == 0) throw Error(Errc::empty_cluster, "sandwich inference: no observations");
    ci.n_pooled = n_total;
    const double inv_n = 1.0 / static_cast<double>(n_total);
    ci.psi_hat *= inv_n;
    ci.omega_hat *= inv_n;

    Matrix psi_l;
    try {
      psi_l = cholesky(ci.psi_hat);
    } catch (const Error&) {
      throw Error(Errc::singular_hessian, "pooled Hessian is singular");
    }
    // variance = Psi^{-1} Omega Psi^{-1} / N
    Matrix var(d, d);
    for (int c = 0; c < d; ++c) {
      Vec col(d);
      for (int r = 0; r < d; ++r) col[r] = ci.omega_hat(r, c);
      col = cholesky_solve(psi_l, col);
      for (int r = 0; r < d; ++r) var(r, c) = col[r];
    }
    for (int r = 0; r < d; ++r) {
      Vec rowv(d);
      for (int c = 0; c < d; ++c) rowv[c] = var(r, c);
      rowv = cholesky_solve(psi_l, rowv);
      for (int c = 0; c < d; ++c) var(r, c) = rowv[c] * inv_n;
    }

    ci.se.assign(d, 0.0);
    ci.ci_lo.assign(d, 0.0);
    ci.ci_hi.assign(d, 0.0);
    for (int r = 0; r < d; ++r) {
      ci.se[r] = std::sqrt(std::max(var(r, r), 0.0));
      ci.ci_lo[r] = ci.estimate[r] - z * ci.se[r];
      ci.ci_hi[r] = ci.estimate[r] + z * ci.se[r];
    }
    out.push_back(std::move(ci));
  }
  return out;
}

Vec standardize_estimates(const Vec& theta_hat, const Vec& theta_star, const Vec& se_per_task) {
  if (theta_hat.size() != theta_star.size() || theta_hat.size() != se_per_task.size())
    throw Error(Errc::dimension_mismatch, "standardize: length mismatch");
  Vec z(theta_hat.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (!(se_per_task[j] > 0.0))
      throw Error(Errc::zero_se, "standardize: zero standard error");
    z[j] = (theta_hat[j] - theta_star[j]) / se_per_task[j];
  }
  return z;
}

}  // namespace orthofuse
