#include "orthofuse/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "orthofuse/errors.hpp"

namespace orthofuse {

Vec group_soft_threshold(const Vec& v, double kappa) {
  if (kappa <= 0.0) return v;
  const double n = norm2(v);
  if (n <= kappa) return Vec(v.size(), 0.0);
  const double s = 1.0 - kappa / n;
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = s * v[i];
  return out;
}

double fused_objective(const std::vector<SmoothLossOracle>& losses, const PenaltyMatrix& penalties,
                       const std::vector<Vec>& theta) {
  double obj = 0;
  const int m = static_cast<int>(losses.size());
  for (int j = 0; j < m; ++j) obj += losses[j].value(theta[j]);
  for (int j = 0; j < m; ++j)
    for (int k = j + 1; k < m; ++k) obj += penalties.lambda(j, k) * norm2(theta[j] - theta[k]);
  return obj;
}

namespace {

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

//! Damped Newton minimization of f(x) + (rho/2) sum ||x - t_e||^2 over the
//! incident edge targets; used for the non-quadratic block update.
Vec newton_block_update(const SmoothLossOracle& f, Vec x, const std::vector<Vec>& targets,
                        double rho, double tol) {
  const int d = f.dim();
  for (int it = 0; it < 100; ++it) {
    Vec g = f.gradient(x);
    for (const auto& t : targets) axpy(rho, x - t, g);
    if (norm2(g) <= tol) break;
    Matrix h = f.hessian(x);
    for (int i = 0; i < d; ++i) h(i, i) += rho * static_cast<double>(targets.size());
    Vec step;
    double damp = 0.0;
    for (;;) {
      try {
        Matrix hd = h;
        for (int i = 0; i < d; ++i) hd(i, i) += damp;
        step = cholesky_solve(cholesky(hd), g);
        break;
      } catch (const Error&) {
        damp = (damp == 0.0) ? 1e-8 * (1.0 + h.max_abs()) : damp * 10.0;
        if (damp > 1e12 * (1.0 + h.max_abs()))
          throw Error(Errc::singular_system, "newton step failed on a singular Hessian");
      }
    }
    // backtracking on the augmented objective
    auto aug = [&](const Vec& y) {
      double v = f.value(y);
      for (const auto& t : targets) {
        const Vec diff = y - t;
        v += 0.5 * rho * dot(diff, diff);
      }
      return v;
    };
    const double base = aug(x);
    double alpha = 1.0;
    Vec cand = x - alpha * step;
    while (aug(cand) > base - 1e-4 * alpha * dot(g, step) && alpha > 1e-8) {
      alpha *= 0.5;
      cand = x - alpha * step;
    }
    if (norm2(x - cand) <= tol * (1.0 + norm2(x))) {
      x = cand;
      break;
    }
    x = cand;
  }
  return x;
}

class FusedAdmm {
 public:
  FusedAdmm(const std::vector<SmoothLossOracle>& losses, const PenaltyMatrix& penalties,
            const SolverConfig& cfg)
      : losses_(losses), penalties_(penalties), cfg_(cfg), m_(static_cast<int>(losses.size())) {
    d_ = losses_[0].dim();
    for (const auto& l : losses_)
      if (l.dim() != d_) throw Error(Errc::dimension_mismatch, "losses differ in dimension");
    all_quadratic_ = true;
    for (const auto& l : losses_) all_quadratic_ = all_quadratic_ && l.quadratic().has_value();
    for (int j = 0; j < m_; ++j)
      for (int k = j + 1; k < m_; ++k)
        edges_.push_back({j, k, Vec(d_, 0.0), Vec(d_, 0.0), penalties_.lambda(j, k), false});
  }

  FusionSolution run() {
    FusionSolution sol;
    init_theta();
    if (m_ == 1 || edges_.empty()) {
      sol.theta_hat = theta_;
      sol.converged = true;
      sol.iterations = 0;
      finalize(sol);
      return sol;
    }
    for (auto& e : edges_) e.z = theta_[e.j] - theta_[e.jp];

    rho_ = cfg_.rho;
    factor_valid_ = false;
    int balance_steps = 0;

    double best_obj = std::numeric_limits<double>::infinity();
    std::vector<Vec> best_theta = theta_;
    std::vector<EdgeVar> best_edges = edges_;

    int it = 0;
    bool converged = false;
    for (it = 1; it <= cfg_.max_iter; ++it) {
      update_theta();
      double r_norm2 = 0, s_norm2 = 0, etheta2 = 0, z2 = 0, dual2 = 0;
      std::vector<Vec> dual_accum(m_, Vec(d_, 0.0));
      for (auto& e : edges_) {
        const Vec diff = theta_[e.j] - theta_[e.jp];
        const Vec v = diff + e.u;
        const Vec z_new = group_soft_threshold(v, e.lambda / rho_);
        // dual residual term rho * E'(z_new - z_old)
        axpy(rho_, z_new - e.z, dual_accum[e.j]);
        axpy(-rho_, z_new - e.z, dual_accum[e.jp]);
        e.z = z_new;
        const Vec r = diff - e.z;
        for (int i = 0; i < d_; ++i) e.u[i] += r[i];
        r_norm2 += dot(r, r);
        etheta2 += dot(diff, diff);
        z2 += dot(e.z, e.z);
      }
      for (const auto& a : dual_accum) s_norm2 += dot(a, a);
      double u2 = 0;
      for (const auto& e : edges_) u2 += dot(e.u, e.u);

      const double obj = fused_objective(losses_, penalties_, theta_);
      if (obj < best_obj) {
        best_obj = obj;
        best_theta = theta_;
        best_edges = edges_;
      }

      const double n_edge_vars = static_cast<double>(edges_.size()) * d_;
      const double n_theta_vars = static_cast<double>(m_) * d_;
      const double eps_pri = cfg_.tol_abs * std::sqrt(n_edge_vars) +
                             cfg_.tol_rel * std::max(std::sqrt(etheta2), std::sqrt(z2));
      const double eps_dual =
          cfg_.tol_abs * std::sqrt(n_theta_vars) + cfg_.tol_rel * rho_ * std::sqrt(u2);
      if (std::sqrt(r_norm2) <= eps_pri && std::sqrt(s_norm2) <= eps_dual) {
        converged = true;
        break;
      }

      if (cfg_.residual_balance && balance_steps < cfg_.max_balance_steps) {
        const double r_norm = std::sqrt(r_norm2), s_norm = std::sqrt(s_norm2);
        if (r_norm > cfg_.balance_trigger * s_norm) {
          rho_ *= cfg_.balance_factor;
          for (auto& e : edges_)
            for (double& ui : e.u) ui /= cfg_.balance_factor;
          factor_valid_ = false;
          ++balance_steps;
        } else if (s_norm > cfg_.balance_trigger * r_norm) {
          rho_ /= cfg_.balance_factor;
          for (auto& e : edges_)
            for (double& ui : e.u) ui *= cfg_.balance_factor;
          factor_valid_ = false;
          ++balance_steps;
        }
      }
    }

    sol.iterations = std::min(it, cfg_.max_iter);
    sol.converged = converged;
    if (!converged) {
      theta_ = std::move(best_theta);
      edges_ = std::move(best_edges);
    }
    sol.theta_hat = theta_;
    sol.z_edges = edges_;
    finalize(sol);
    return sol;
  }

 private:
  void init_theta() {
    theta_.assign(m_, Vec(d_, 0.0));
    for (int j = 0; j < m_; ++j) {
      if (losses_[j].quadratic()) {
        theta_[j] = losses_[j].quadratic()->minimizer();
      } else {
        theta_[j] = newton_block_update(losses_[j], Vec(d_, 0.0), {}, 0.0, cfg_.inner_newton_tol);
      }
    }
  }

  // exact coupled solve for quadratic losses, cached factor per rho
  void refactor() {
    const int n = m_ * d_;
    Matrix big(n, n);
    for (int j = 0; j < m_; ++j) {
      const Matrix& a = losses_[j].quadratic()->A;
      for (int r = 0; r < d_; ++r)
        for (int c = 0; c < d_; ++c) big(j * d_ + r, j * d_ + c) = 2.0 * a(r, c);
    }
    for (const auto& e : edges_) {
      for (int r = 0; r < d_; ++r) {
        big(e.j * d_ + r, e.j * d_ + r) += rho_;
        big(e.jp * d_ + r, e.jp * d_ + r) += rho_;
        big(e.j * d_ + r, e.jp * d_ + r) -= rho_;
        big(e.jp * d_ + r, e.j * d_ + r) -= rho_;
      }
    }
    try {
      factor_ = cholesky(big);
    } catch (const Error&) {
      throw Error(Errc::singular_system, "coupled quadratic system is singular");
    }
    factor_valid_ = true;
  }

  void update_theta() {
    if (all_quadratic_) {
      if (!factor_valid_) refactor();
      Vec rhs(static_cast<std::size_t>(m_) * d_, 0.0);
      for (int j = 0; j < m_; ++j) {
        const Vec& b = losses_[j].quadratic()->b;
        for (int r = 0; r < d_; ++r) rhs[j * d_ + r] = 2.0 * b[r];
      }
      for (const auto& e : edges_) {
        for (int r = 0; r < d_; ++r) {
          const double w = rho_ * (e.z[r] - e.u[r]);
          rhs[e.j * d_ + r] += w;
          rhs[e.jp * d_ + r] -= w;
        }
      }
      const Vec x = cholesky_solve(factor_, rhs);
      for (int j = 0; j < m_; ++j)
        for (int r = 0; r < d_; ++r) theta_[j][r] = x[j * d_ + r];
      return;
    }
    // Gauss-Seidel sweeps with damped Newton block updates
    for (int sweep = 0; sweep < 50; ++sweep) {
      double change = 0;
      for (int j = 0; j < m_; ++j) {
        std::vector<Vec> targets;
        for (const auto& e : edges_) {
          if (e.j == j)
            targets.push_back(theta_[e.jp] + e.z - e.u);
          else if (e.jp == j)
            targets.push_back(theta_[e.j] - e.z + e.u);
        }
        Vec updated =
            newton_block_update(losses_[j], theta_[j], targets, rho_, cfg_.inner_newton_tol);
        change = std::max(change, norm_inf(updated - theta_[j]));
        theta_[j] = std::move(updated);
      }
      if (change <= cfg_.inner_newton_tol * 10.0) break;
    }
  }

  void finalize(FusionSolution& sol) {
    sol.partition = extract_partition(sol.theta_hat, sol.z_edges, cfg_);
    sol.objective_value = fused_objective(losses_, penalties_, sol.theta_hat);
  }

  const std::vector<SmoothLossOracle>& losses_;
  const PenaltyMatrix& penalties_;
  SolverConfig cfg_;
  int m_;
  int d_ = 1;
  bool all_quadratic_ = false;
  double rho_ = 1.0;
  bool factor_valid_ = false;
  Matrix factor_;
  std::vector<Vec> theta_;
  std::vector<EdgeVar> edges_;
};

}  // namespace

FusionSolution solve_fused(const std::vector<SmoothLossOracle>& losses,
                           const PenaltyMatrix& penalties, const SolverConfig& cfg) {
  if (losses.empty()) throw Error(Errc::empty_data, "solve_fused: no losses");
  if (penalties.size() != static_cast<int>(losses.size()))
    throw Error(Errc::dimension_mismatch, "penalty matrix size differs from task count");
  FusedAdmm admm(losses, penalties, cfg);
  return admm.run();
}

std::vector<std::vector<int>> extract_partition(std::vector<Vec>& theta_hat,
                                                std::vector<EdgeVar>& z_edges,
                                                const SolverConfig& cfg) {
  const int m = static_cast<int>(theta_hat.size());
  double scale = 0;
  for (const auto& t : theta_hat) scale = std::max(scale, norm_inf(t));
  const double tol = cfg.fuse_tol * (1.0 + scale);

  DisjointSet ds(m);
  for (auto& e : z_edges) {
    bool z_zero = true;
    for (double v : e.z) z_zero = z_zero && (v == 0.0);
    e.fused = z_zero && norm2(theta_hat[e.j] - theta_hat[e.jp]) <= tol;
    if (e.fused) ds.unite(e.j, e.jp);
  }

  std::vector<std::vector<int>> groups(m);
  for (int j = 0; j < m; ++j) groups[ds.find(j)].push_back(j);
  std::vector<std::vector<int>> partition;
  for (int j = 0; j < m; ++j)
    if (!groups[j].empty()) partition.push_back(std::move(groups[j]));
  std::sort(partition.begin(), partition.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });

  // consensus snap: members of one component share the exact same estimate
  const int d = theta_hat.empty() ? 0 : static_cast<int>(theta_hat[0].size());
  for (const auto& cluster : partition) {
    if (cluster.size() < 2) continue;
    Vec mean(d, 0.0);
    for (int j : cluster) axpy(1.0, theta_hat[j], mean);
    for (double& v : mean) v /= static_cast<double>(cluster.size());
    for (int j : cluster) theta_hat[j] = mean;
  }
  return partition;
}

std::vector<Vec> refit_clusters(const std::vector<SmoothLossOracle>& losses,
                                const std::vector<std::vector<int>>& partition) {
  std::vector<Vec> out;
  out.reserve(partition.size());
  for (const auto& cluster : partition) {
    if (cluster.empty()) throw Error(Errc::empty_cluster, "refit: empty cluster");
    const int d = losses[cluster[0]].dim();
    bool quad = true;
    for (int j : cluster) quad = quad && losses[j].quadratic().has_value();
    if (quad) {
      Matrix a(d, d);
      Vec b(d, 0.0);
      for (int j : cluster) {
        a += losses[j].quadratic()->A;
        axpy(1.0, losses[j].quadratic()->b, b);
      }
      try {
        out.push_back(solve_spd(a, b));
      } catch (const Error&) {
        throw Error(Errc::singular_system, "refit: pooled curvature is singular");
      }
    } else {
      // pooled Newton on the summed oracle
      SmoothLossOracle pooled(d, 0, true, [&losses, cluster, d](const Vec& th, double* v, Vec* g, Matrix* h) {
        if (v) *v = 0;
        if (g) g->assign(d, 0.0);
        if (h) *h = Matrix(d, d);
        for (int j : cluster) {
          if (v) *v += losses[j].value(th);
          if (g) axpy(1.0, losses[j].gradient(th), *g);
          if (h) *h += losses[j].hessian(th);
        }
      });
      out.push_back(newton_block_update(pooled, Vec(d, 0.0), {}, 0.0, 1e-12));
    }
  }
  return out;
}

}  // namespace orthofuse
