#include "orthofuse/loss.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "orthofuse/errors.hpp"

namespace orthofuse {

double QuadraticLoss::value(const Vec& theta) const {
  return dot(theta, A * theta) - 2.0 * dot(b, theta) + c;
}

Vec QuadraticLoss::gradient(const Vec& theta) const {
  Vec g = A * theta;
  for (int i = 0; i < dim(); ++i) g[i] = 2.0 * (g[i] - b[i]);
  return g;
}

Matrix QuadraticLoss::hessian() const { return A * 2.0; }

Vec QuadraticLoss::minimizer() const {
  try {
    return solve_spd(A, b);
  } catch (const Error& e) {
    if (e.code() == Errc::not_positive_definite)
      throw Error(Errc::degenerate_design, "loss curvature is singular; target unidentified");
    throw;
  }
}

Vec PerObsQuadratic::score(int i, const Vec& theta) const {
  Vec s(dim, 0.0);
  for (int r = 0; r < dim; ++r) {
    double v = -b[static_cast<std::size_t>(i) * dim + r];
    for (int c = 0; c < dim; ++c)
      v += a[(static_cast<std::size_t>(i) * dim + r) * dim + c] * theta[c];
    s[r] = 2.0 * v;
  }
  return s;
}

Matrix PerObsQuadratic::hessian(int i) const {
  Matrix h(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c)
      h(r, c) = 2.0 * a[(static_cast<std::size_t>(i) * dim + r) * dim + c];
  return h;
}

SmoothLossOracle SmoothLossOracle::from_quadratic(QuadraticLoss q) {
  const int d = q.dim();
  auto shared = std::make_shared<QuadraticLoss>(q);
  SmoothLossOracle o(d, q.n_eff, true, [shared](const Vec& theta, double* v, Vec* g, Matrix* h) {
    if (v) *v = shared->value(theta);
    if (g) *g = shared->gradient(theta);
    if (h) *h = shared->hessian();
  });
  o.quad_ = std::move(q);
  return o;
}

double SmoothLossOracle::value(const Vec& theta) const {
  double v = 0;
  eval_(theta, &v, nullptr, nullptr);
  return v;
}

Vec SmoothLossOracle::gradient(const Vec& theta) const {
  Vec g;
  eval_(theta, nullptr, &g, nullptr);
  return g;
}

Matrix SmoothLossOracle::hessian(const Vec& theta) const {
  Matrix h;
  eval_(theta, nullptr, nullptr, &h);
  return h;
}

namespace {

void check_pred_length(const Vec& pred, int n, const char* name) {
  if (static_cast<int>(pred.size()) != n)
    throw Error(Errc::dimension_mismatch,
                std::string(name) + " prediction vector must cover every row");
}

void check_identified(const QuadraticLoss& q) {
  try {
    cholesky(q.A);
  } catch (const Error&) {
    throw Error(Errc::degenerate_design, "design is degenerate; slope unidentified");
  }
}

}  // namespace

TaskLoss build_plm_loss(const TaskDataset& data, const Vec& h_pred, const Vec& m_pred,
                        const std::vector<int>& rows) {
  check_pred_length(h_pred, data.n(), "h");
  check_pred_length(m_pred, data.n(), "m");
  TaskLoss loss;
  loss.quad.A = Matrix(1, 1);
  loss.quad.b.assign(1, 0.0);
  loss.obs.dim = 1;
  loss.obs.a.reserve(rows.size());
  loss.obs.b.reserve(rows.size());
  for (int r : rows) {
    const double tt = data.treatment[r] - h_pred[r];
    const double yy = data.outcome[r] - m_pred[r];
    loss.quad.A(0, 0) += tt * tt;
    loss.quad.b[0] += tt * yy;
    loss.quad.c += yy * yy;
    loss.obs.a.push_back(tt * tt);
    loss.obs.b.push_back(tt * yy);
  }
  loss.quad.n_eff = static_cast<int>(rows.size());
  check_identified(loss.quad);
  return loss;
}

Vec aipw_pseudo_outcome(const TaskDataset& data, const Vec& pi_pred, const Vec& m1_pred,
                        const Vec& m0_pred, const std::vector<int>& rows) {
  check_pred_length(pi_pred, data.n(), "pi");
  check_pred_length(m1_pred, data.n(), "m1");
  check_pred_length(m0_pred, data.n(), "m0");
  Vec yhat;
  yhat.reserve(rows.size());
  for (int r : rows) {
    const double pi = pi_pred[r];
    if (pi <= 0.0 || pi >= 1.0)
      throw Error(Errc::unclipped_propensity, "propensity hit {0,1}; clip before building the loss");
    const double d = data.treatment[r], y = data.outcome[r];
    yhat.push_back(d * (y - m1_pred[r]) / pi - (1.0 - d) * (y - m0_pred[r]) / (1.0 - pi) +
                   m1_pred[r] - m0_pred[r]);
  }
  return yhat;
}

TaskLoss build_ate_loss(const TaskDataset& data, const Vec& pi_pred, const Vec& m1_pred,
                        const Vec& m0_pred, const std::vector<int>& rows) {
  const Vec yhat = aipw_pseudo_outcome(data, pi_pred, m1_pred, m0_pred, rows);
  TaskLoss loss;
  loss.quad.A = Matrix(1, 1);
  loss.quad.A(0, 0) = static_cast<double>(rows.size());
  loss.quad.b.assign(1, 0.0);
  loss.obs.dim = 1;
  loss.obs.a.assign(rows.size(), 1.0);
  loss.obs.b.reserve(rows.size());
  for (double v : yhat) {
    loss.quad.b[0] += v;
    loss.quad.c += v * v;
    loss.obs.b.push_back(v);
  }
  loss.quad.n_eff = static_cast<int>(rows.size());
  check_identified(loss.quad);
  return loss;
}

TaskLoss build_did_loss(const TaskDataset& data, const Vec& pi_pred, const Vec& m_pred,
                        const std::vector<int>& weight_rows, const std::vector<int>& loss_rows) {
  check_pred_length(pi_pred, data.n(), "pi");
  check_pred_length(m_pred, data.n(), "m");
  if (weight_rows.empty() || loss_rows.empty())
    throw Error(Errc::empty_data, "did loss needs nonempty weight and loss folds");

  auto odds = [&](int r) {
    const double pi = pi_pred[r];
    if (pi <= 0.0 || pi >= 1.0)
      throw Error(Errc::unclipped_propensity, "propensity hit {0,1}; clip before building the loss");
    return pi * (1.0 - data.treatment[r]) / (1.0 - pi);
  };

  double d_bar = 0, v_bar = 0;
  for (int r : weight_rows) {
    d_bar += data.treatment[r];
    v_bar += odds(r);
  }
  d_bar /= static_cast<double>(weight_rows.size());
  v_bar /= static_cast<double>(weight_rows.size());
  if (d_bar <= 0.0)
    throw Error(Errc::no_treated_in_weight_fold, "no treated units in the weight fold");
  if (v_bar <= 0.0)
    throw Error(Errc::zero_control_mass, "control odds mass is zero in the weight fold");

  TaskLoss loss;
  loss.obs.dim = 1;
  loss.obs.a.reserve(loss_rows.size());
  loss.obs.b.reserve(loss_rows.size());
  double w1_sum = 0, a_sum = 0;
  for (int r : loss_rows) {
    const double w1 = data.treatment[r] / d_bar;
    const double w0 = odds(r) / v_bar;
    const double dy = data.outcome[r] - data.outcome_pre[r];
    const double a_i = (w1 - w0) * (dy - m_pred[r]);
    w1_sum += w1;
    a_sum += a_i;
    loss.obs.a.push_back(w1);
    loss.obs.b.push_back(a_i);
  }
  const double n2 = static_cast<double>(loss_rows.size());
  const double a_coef = w1_sum / n2;           // mean treated weight
  const double b_coef = (w1_sum > 0) ? a_sum / w1_sum : 0.0;
  loss.quad.A = Matrix(1, 1);
  loss.quad.A(0, 0) = a_coef;
  loss.quad.b.assign(1, a_coef * b_coef);
  loss.quad.c = a_coef * b_coef * b_coef;      // so f(theta) = a (theta - b)^2
  loss.quad.n_eff = static_cast<int>(loss_rows.size());
  check_identified(loss.quad);
  return loss;
}

TaskLoss crossfit_average(const std::vector<TaskLoss>& fold_losses) {
  if (fold_losses.size() < 2)
    throw Error(Errc::invalid_spec, "crossfit needs at least two folds");
  const int d = fold_losses[0].quad.dim();
  const double r_inv = 1.0 / static_cast<double>(fold_losses.size());
  TaskLoss out;
  out.quad.A = Matrix(d, d);
  out.quad.b.assign(d, 0.0);
  out.obs.dim = d;
  for (const auto& fl : fold_losses) {
    if (fl.quad.dim() != d)
      throw Error(Errc::dimension_mismatch, "fold losses have different dimensions");
    out.quad.A += fl.quad.A * r_inv;
    axpy(r_inv, fl.quad.b, out.quad.b);
    out.quad.c += r_inv * fl.quad.c;
    out.quad.n_eff += fl.quad.n_eff;
    // each observation enters the averaged loss once, at weight 1/R
    for (double v : fl.obs.a) out.obs.a.push_back(r_inv * v);
    for (double v : fl.obs.b) out.obs.b.push_back(r_inv * v);
  }
  return out;
}

SmoothLossOracle crossfit_loss(const std::vector<SmoothLossOracle>& per_fold, int R) {
  if (R != static_cast<int>(per_fold.size()) || R < 2)
    throw Error(Errc::invalid_spec, "crossfit_loss: R must equal the fold count and be >= 2");
  const int d = per_fold[0].dim();
  int n_eff = 0;
  bool convex = true;
  for (const auto& o : per_fold) {
    if (o.dim() != d) throw Error(Errc::dimension_mismatch, "fold oracles differ in dimension");
    n_eff += o.n_eff();
    convex = convex && o.convex();
  }
  const double r_inv = 1.0 / R;
  auto folds = std::make_shared<std::vector<SmoothLossOracle>>(per_fold);
  return SmoothLossOracle(d, n_eff, convex,
                          [folds, r_inv, d](const Vec& theta, double* v, Vec* g, Matrix* h) {
                            if (v) *v = 0.0;
                            if (g) g->assign(d, 0.0);
                            if (h) *h = Matrix(d, d);
                            for (const auto& o : *folds) {
                              if (v) *v += r_inv * o.value(theta);
                              if (g) axpy(r_inv, o.gradient(theta), *g);
                              if (h) {
                                Matrix hh = o.hessian(theta);
                                hh *= r_inv;
                                *h += hh;
                              }
                            }
                          });
}

namespace {

Vec perturb(const Vec& pred, const Vec& dir, double eps) {
  Vec out = pred;
  axpy(eps, dir, out);
  return out;
}

double loss_gradient_at(ModelKind model, const TaskDataset& data,
                        const std::map<std::string, Vec>& preds, double theta_star,
                        LossForm form, const std::vector<int>& rows) {
  if (form == LossForm::plugin) {
    if (model != ModelKind::plm)
      throw Error(Errc::invalid_spec, "plugin diagnostic is defined for the plm loss");
    // non-orthogonal plug-in loss sum (Y - m(X) - theta T)^2
    const Vec& m = preds.at("m");
    double g = 0;
    for (int r : rows)
      g += -2.0 * data.treatment[r] * (data.outcome[r] - m[r] - theta_star * data.treatment[r]);
    return g;
  }
  Vec theta{theta_star};
  switch (model) {
    case ModelKind::plm:
      return build_plm_loss(data, preds.at("h"), preds.at("m"), rows).quad.gradient(theta)[0];
    case ModelKind::ate:
      return build_ate_loss(data, preds.at("pi"), preds.at("m1"), preds.at("m0"), rows)
          .quad.gradient(theta)[0];
    case ModelKind::did:
      return build_did_loss(data, preds.at("pi"), preds.at("m"), rows, rows)
          .quad.gradient(theta)[0];
  }
  return 0.0;
}

}  // namespace

double orthogonality_diagnostic(ModelKind model, const TaskDataset& data,
                                const std::map<std::string, Vec>* truth, double theta_star,
                                double direction_scale, LossForm form) {
  if (truth == nullptr)
    throw Error(Errc::requires_truth, "the diagnostic needs true nuisance predictions");
  if (direction_scale == 0.0) return 0.0;
  const auto rows = all_rows(data);
  Vec dir(data.n());
  for (int r = 0; r < data.n(); ++r) {
    double s = 0;
    for (int j = 0; j < data.p(); ++j) s += data.covariates(r, j);
    dir[r] = std::tanh(s);
  }
  std::map<std::string, Vec> shifted;
  for (const auto& [name, pred] : *truth) shifted[name] = perturb(pred, dir, direction_scale);
  const double g1 = loss_gradient_at(model, data, shifted, theta_star, form, rows);
  const double g0 = loss_gradient_at(model, data, *truth, theta_star, form, rows);
  return std::fabs(g1 - g0) / (std::fabs(direction_scale) * static_cast<double>(data.n()));
}

}  // namespace orthofuse
