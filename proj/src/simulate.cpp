#include "orthofuse/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "orthofuse/errors.hpp"
#include "orthofuse/stats.hpp"

namespace orthofuse {

double dgp_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double dgp_h(const Matrix& x, int row) {
  double s = 0;
  for (int j = 0; j < x.cols(); ++j) s += x(row, j);
  return 0.2 * std::tanh(s);
}

double dgp_g(const Matrix& x, int row) {
  double s = 0, sign = 1.0, pw = 1.0;
  for (int j = 0; j < x.cols(); ++j) {
    sign = -sign;
    pw *= 0.8;
    s += sign * pw * dgp_sigmoid(x(row, j));  // (-0.8)^(j+1)
  }
  return s;
}

double dgp_pi(const Matrix& x, int row) {
  const double raw = dgp_sigmoid(x(row, 3) * x(row, 4) - x(row, 0) * x(row, 1));
  return std::clamp(raw, 0.05, 0.95);
}

double dgp_mu0(const Matrix& x, int row) {
  double s = 0, pw = 1.0;
  for (int j = 0; j < x.cols(); ++j) {
    pw *= 0.7;
    s += pw * dgp_sigmoid(x(row, j));
  }
  return s;
}

double dgp_mu1(const Matrix& x, int row) {
  double s = 0, pw = 1.0;
  for (int j = 0; j < x.cols(); ++j) {
    pw *= -0.7;
    s += pw * dgp_sigmoid(x(row, j));
  }
  return s;
}

SimTruth assign_clusters(const DgpConfig& cfg, Rng& rng) {
  if (cfg.K > cfg.m) throw Error(Errc::invalid_config, "K must not exceed m");
  SimTruth truth;
  truth.beta_star.resize(cfg.K);
  for (int k = 0; k < cfg.K; ++k)
    truth.beta_star[k] = (k + 1) * cfg.delta - (cfg.K + 1) * cfg.delta / 2.0;

  for (int attempt = 0; attempt < 100; ++attempt) {
    truth.cluster_of.assign(cfg.m, 0);
    std::vector<int> counts(cfg.K, 0);
    for (int j = 0; j < cfg.m; ++j) {
      truth.cluster_of[j] = static_cast<int>(rng.next_below(cfg.K));
      ++counts[truth.cluster_of[j]];
    }
    if (std::all_of(counts.begin(), counts.end(), [](int c) { return c > 0; })) break;
    if (attempt == 99)
      throw Error(Errc::invalid_config, "could not draw a labeling with nonempty clusters");
  }

  truth.theta_star.resize(cfg.m);
  for (int j = 0; j < cfg.m; ++j) {
    double perturb = 0.0;
    if (cfg.xi_max > 0.0) perturb = cfg.xi_max * (2.0 * rng.next_double() - 1.0);
    truth.theta_star[j] = truth.beta_star[truth.cluster_of[j]] + perturb;
  }
  return truth;
}

TaskDataset generate_task(const DgpConfig& cfg, const SimTruth& truth, int j, Rng& rng) {
  if (j < 1 || j > cfg.m) throw Error(Errc::invalid_config, "task index out of range");
  const int n = cfg.n_j(j);
  const int p = cfg.p_j(j);
  const double theta = truth.theta_star[j - 1];

  TaskDataset task;
  task.task_id = j;
  task.covariates = Matrix(n, p);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < p; ++c) task.covariates(i, c) = rng.next_normal();

  task.outcome.resize(n);
  task.treatment.resize(n);
  switch (cfg.model) {
    case ModelKind::plm:
      for (int i = 0; i < n; ++i) {
        const double nu = rng.next_normal();
        const double eps = rng.next_normal();
        task.treatment[i] = dgp_h(task.covariates, i) + nu;
        task.outcome[i] = theta * task.treatment[i] + dgp_g(task.covariates, i) + eps;
      }
      break;
    case ModelKind::ate:
      for (int i = 0; i < n; ++i) {
        const double d = rng.next_bernoulli(dgp_pi(task.covariates, i)) ? 1.0 : 0.0;
        const double eps = rng.next_normal();
        task.treatment[i] = d;
        task.outcome[i] = theta * d + dgp_g(task.covariates, i) + eps;
      }
      break;
    case ModelKind::did:
      task.outcome_pre.resize(n);
      for (int i = 0; i < n; ++i) {
        const double d = rng.next_bernoulli(dgp_pi(task.covariates, i)) ? 1.0 : 0.0;
        const double eps0 = rng.next_normal();
        const double eps1 = rng.next_normal();
        task.treatment[i] = d;
        task.outcome_pre[i] = dgp_mu0(task.covariates, i) + eps0;
        task.outcome[i] = theta * d + dgp_mu1(task.covariates, i) + eps1;
      }
      break;
  }
  return task;
}

std::map<std::string, Vec> truth_predictions(const TaskDataset& data, ModelKind model,
                                             double theta_star) {
  const int n = data.n();
  std::map<std::string, Vec> preds;
  switch (model) {
    case ModelKind::plm: {
      Vec h(n), m(n);
      for (int i = 0; i < n; ++i) {
        h[i] = dgp_h(data.covariates, i);
        m[i] = theta_star * h[i] + dgp_g(data.covariates, i);
      }
      preds["h"] = std::move(h);
      preds["m"] = std::move(m);
      break;
    }
    case ModelKind::ate: {
      Vec pi(n), m1(n), m0(n);
      for (int i = 0; i < n; ++i) {
        pi[i] = dgp_pi(data.covariates, i);
        const double g = dgp_g(data.covariates, i);
        m1[i] = theta_star + g;
        m0[i] = g;
      }
      preds["pi"] = std::move(pi);
      preds["m1"] = std::move(m1);
      preds["m0"] = std::move(m0);
      break;
    }
    case ModelKind::did: {
      Vec pi(n), m(n);
      for (int i = 0; i < n; ++i) {
        pi[i] = dgp_pi(data.covariates, i);
        m[i] = dgp_mu1(data.covariates, i) - dgp_mu0(data.covariates, i);
      }
      preds["pi"] = std::move(pi);
      preds["m"] = std::move(m);
      break;
    }
  }
  return preds;
}

double rmse(const std::vector<Vec>& theta_hat, const std::vector<Vec>& theta_star) {
  if (theta_hat.size() != theta_star.size())
    throw Error(Errc::dimension_mismatch, "rmse: length mismatch");
  double s = 0;
  for (std::size_t j = 0; j < theta_hat.size(); ++j) {
    const Vec d = theta_hat[j] - theta_star[j];
    s += dot(d, d);
  }
  return std::sqrt(s / static_cast<double>(theta_hat.size()));
}

double wrmse(const std::vector<Vec>& theta_hat, const std::vector<Vec>& theta_star,
             const std::vector<double>& pooled_sizes) {
  if (theta_hat.size() != theta_star.size() || theta_hat.size() != pooled_sizes.size())
    throw Error(Errc::dimension_mismatch, "wrmse: length mismatch");
  double s = 0, b = 0;
  for (std::size_t j = 0; j < theta_hat.size(); ++j) {
    const Vec d = theta_hat[j] - theta_star[j];
    s += pooled_sizes[j] * dot(d, d);
    b += pooled_sizes[j];
  }
  return std::sqrt(s / b);
}

double adjusted_rand_index(const std::vector<int>& labels_true,
                           const std::vector<int>& labels_est) {
  const std::size_t m = labels_true.size();
  if (labels_est.size() != m)
    throw Error(Errc::dimension_mismatch, "ari: labelings cover different sets");
  if (m < 2) throw Error(Errc::single_element, "ari needs at least two elements");

  auto compress = [](const std::vector<int>& v) {
    std::vector<int> sorted(v);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<int> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      out[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), v[i]) -
                                sorted.begin());
    return std::pair{out, static_cast<int>(sorted.size())};
  };
  const auto [a, ka] = compress(labels_true);
  const auto [b, kb] = compress(labels_est);

  std::vector<long long> cnt(static_cast<std::size_t>(ka) * kb, 0);
  std::vector<long long> ra(ka, 0), rb(kb, 0);
  for (std::size_t i = 0; i < m; ++i) {
    ++cnt[static_cast<std::size_t>(a[i]) * kb + b[i]];
    ++ra[a[i]];
    ++rb[b[i]];
  }
  auto comb2 = [](long long n) { return 0.5 * static_cast<double>(n) * (n - 1); };
  double sum_ij = 0, sum_a = 0, sum_b = 0;
  for (long long v : cnt) sum_ij += comb2(v);
  for (long long v : ra) sum_a += comb2(v);
  for (long long v : rb) sum_b += comb2(v);
  const double expected = sum_a * sum_b / comb2(static_cast<long long>(m));
  const double denom = 0.5 * (sum_a + sum_b) - expected;
  if (denom == 0.0) return 1.0;  // both partitions trivial and identical in pair structure
  return (sum_ij - expected) / denom;
}

int default_thread_count() {
  if (const char* env = std::getenv("ORTHOFUSE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

namespace {

struct RepOutcome {
  bool failed = false;
  std::vector<RepRecord> records;
  std::map<std::string, double> rmse_by_method, wrmse_by_method, ari_by_method;
  std::map<std::string, std::pair<long long, long long>> coverage_by_method;  // covered, total
};

RepOutcome run_one_rep(const DgpConfig& cfg, const std::vector<MethodSpec>& methods,
                       const PipelineConfig& pipeline, int rep, bool retry) {
  const std::uint64_t r = static_cast<std::uint64_t>(rep);
  const std::uint64_t data_salt = retry ? stream::kRetry : 0;

  Rng truth_rng(cfg.seed, stream::salted(stream::kTruth + data_salt, r, 0));
  const SimTruth truth = assign_clusters(cfg, truth_rng);

  std::vector<TaskDataset> tasks;
  tasks.reserve(cfg.m);
  for (int j = 1; j <= cfg.m; ++j) {
    Rng rng(cfg.seed, retry ? stream::salted(stream::kRetry, r, j) : stream::data(r, j));
    tasks.push_back(generate_task(cfg, truth, j, rng));
  }

  std::vector<double> pooled(cfg.m, 0.0);
  {
    Vec cluster_n(cfg.K, 0.0);
    for (int j = 0; j < cfg.m; ++j) cluster_n[truth.cluster_of[j]] += cfg.n_j(j + 1);
    for (int j = 0; j < cfg.m; ++j) pooled[j] = cluster_n[truth.cluster_of[j]];
  }

  RepOutcome out;
  const PreparedTasks prepared = prepare_tasks(std::move(tasks), pipeline, cfg.seed, r);
  for (const auto& method : methods) {
    const MethodResult res = run_method(prepared, method, pipeline);
    const std::string label = method.label();

    std::vector<Vec> hat(cfg.m), star(cfg.m);
    long long covered = 0, total = 0;
    for (int j = 0; j < cfg.m; ++j) {
      hat[j] = res.solution.theta_hat[j];
      star[j] = Vec{truth.theta_star[j]};
      const ClusterInference& ci = res.inference[res.cluster_of[j]];
      RepRecord rec;
      rec.rep = rep;
      rec.method = label;
      rec.task = j + 1;
      rec.cluster_true = truth.cluster_of[j];
      rec.cluster_est = res.cluster_of[j];
      rec.theta_true = truth.theta_star[j];
      rec.theta_hat = res.solution.theta_hat[j][0];
      rec.se = ci.se[0];
      out.records.push_back(rec);
      ++total;
      if (truth.theta_star[j] >= ci.ci_lo[0] && truth.theta_star[j] <= ci.ci_hi[0]) ++covered;
    }
    out.rmse_by_method[label] = rmse(hat, star);
    out.wrmse_by_method[label] = wrmse(hat, star, pooled);
    out.ari_by_method[label] = adjusted_rand_index(truth.cluster_of, res.cluster_of);
    out.coverage_by_method[label] = {covered, total};
  }
  return out;
}

}  // namespace

MonteCarloResult run_monte_carlo(const DgpConfig& cfg, const std::vector<MethodSpec>& methods,
                                 int reps, const PipelineConfig& pipeline, int threads) {
  if (reps < 1) throw Error(Errc::invalid_config, "reps must be >= 1");
  if (methods.empty()) throw Error(Errc::invalid_config, "need at least one method");
  if (threads <= 0) threads = default_thread_count();
  threads = std::min(threads, reps);

  std::vector<RepOutcome> outcomes(reps);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int rep = next.fetch_add(1);
      if (rep >= reps) return;
      try {
        outcomes[rep] = run_one_rep(cfg, methods, pipeline, rep, false);
      } catch (const Error&) {
        try {
          outcomes[rep] = run_one_rep(cfg, methods, pipeline, rep, true);
        } catch (const Error&) {
          outcomes[rep].failed = true;
        }
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  MonteCarloResult result;
  std::map<std::string, std::vector<double>> rmse_all, wrmse_all, ari_all;
  std::map<std::string, std::pair<long long, long long>> cover_all;
  for (int rep = 0; rep < reps; ++rep) {
    const RepOutcome& o = outcomes[rep];
    if (o.failed) {
      result.report.failed_reps.push_back(rep);
      continue;
    }
    ++result.report.completed_reps;
    result.records.insert(result.records.end(), o.records.begin(), o.records.end());
    for (const auto& m : methods) {
      const std::string label = m.label();
      rmse_all[label].push_back(o.rmse_by_method.at(label));
      wrmse_all[label].push_back(o.wrmse_by_method.at(label));
      ari_all[label].push_back(o.ari_by_method.at(label));
      auto [c, t] = o.coverage_by_method.at(label);
      cover_all[label].first += c;
      cover_all[label].second += t;
    }
  }
  for (const auto& m : methods) {
    const std::string label = m.label();
    MethodSummary s;
    s.method = label;
    if (!rmse_all[label].empty()) {
      s.rmse_mean = mean(rmse_all[label]);
      s.rmse_median = median(rmse_all[label]);
      s.wrmse_mean = mean(wrmse_all[label]);
      s.wrmse_median = median(wrmse_all[label]);
      s.ari_mean = mean(ari_all[label]);
      s.ari_median = median(ari_all[label]);
      s.coverage = cover_all[label].second > 0
                       ? static_cast<double>(cover_all[label].first) / cover_all[label].second
                       : 0.0;
    }
    result.report.methods.push_back(std::move(s));
  }
  return result;
}

}  // namespace orthofuse
