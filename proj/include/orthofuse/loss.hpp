#ifndef ORTHOFUSE_LOSS_HPP_
#define ORTHOFUSE_LOSS_HPP_

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orthofuse/dataset.hpp"
#include "orthofuse/linalg.hpp"

namespace orthofuse {

//! f(theta) = theta'A theta - 2 b'theta + c over n_eff observations.
struct QuadraticLoss {
  Matrix A;
  Vec b;
  double c = 0.0;
  int n_eff = 0;

  int dim() const { return static_cast<int>(b.size()); }
  double value(const Vec& theta) const;
  Vec gradient(const Vec& theta) const;  // 2(A theta - b)
  Matrix hessian() const;                // 2A
  //! Unpenalized minimizer A^{-1} b; throws DegenerateDesign-ish errors via solve_spd.
  Vec minimizer() const;
};

//! Per-observation quadratic decomposition l_i(theta) = theta'a_i theta
//! - 2 b_i'theta + const, used for sandwich scores and Hessians.
struct PerObsQuadratic {
  int dim = 1;
  std::vector<double> a;  // n * dim * dim, row-major blocks
  std::vector<double> b;  // n * dim

  int count() const { return dim == 0 ? 0 : static_cast<int>(b.size()) / dim; }
  //! score of observation i at theta: 2(a_i theta - b_i)
  Vec score(int i, const Vec& theta) const;
  //! Hessian block of observation i: 2 a_i
  Matrix hessian(int i) const;
};

struct TaskLoss {
  QuadraticLoss quad;
  PerObsQuadratic obs;
};

//! Smooth loss contract: value / gradient / Hessian at any theta. Exactly
//! quadratic losses carry their coefficients so solvers can take the exact
//! block-solve path.
class SmoothLossOracle {
 public:
  // fills any non-null output
  using EvalFn = std::function<void(const Vec& theta, double* value, Vec* grad, Matrix* hess)>;

  SmoothLossOracle(int dim, int n_eff, bool convex, EvalFn eval)
      : dim_(dim), n_eff_(n_eff), convex_(convex), eval_(std::move(eval)) {}

  static SmoothLossOracle from_quadratic(QuadraticLoss q);

  double value(const Vec& theta) const;
  Vec gradient(const Vec& theta) const;
  Matrix hessian(const Vec& theta) const;

  int dim() const { return dim_; }
  int n_eff() const { return n_eff_; }
  bool convex() const { return convex_; }
  const std::optional<QuadraticLoss>& quadratic() const { return quad_; }

 private:
  int dim_;
  int n_eff_;
  bool convex_;
  EvalFn eval_;
  std::optional<QuadraticLoss> quad_;
};

//! Residual-on-residual squared loss over the given rows:
//! sum_i {(Y_i - m(X_i)) - theta (T_i - h(X_i))}^2.
//! Prediction vectors are full length (one entry per dataset row).
TaskLoss build_plm_loss(const TaskDataset& data, const Vec& h_pred, const Vec& m_pred,
                        const std::vector<int>& rows);

//! Doubly robust pseudo-outcomes, one per entry of rows.
Vec aipw_pseudo_outcome(const TaskDataset& data, const Vec& pi_pred, const Vec& m1_pred,
                        const Vec& m0_pred, const std::vector<int>& rows);

//! sum_i (theta - Yhat_i)^2 with Yhat the AIPW pseudo-outcome.
TaskLoss build_ate_loss(const TaskDataset& data, const Vec& pi_pred, const Vec& m1_pred,
                        const Vec& m0_pred, const std::vector<int>& rows);

//! Doubly robust DID loss a (theta - b)^2 with normalized weights. The
//! weight statistics (share treated, control odds mass) come from
//! weight_rows, the loss itself from loss_rows.
TaskLoss build_did_loss(const TaskDataset& data, const Vec& pi_pred, const Vec& m_pred,
                        const std::vector<int>& weight_rows, const std::vector<int>& loss_rows);

//! Average of per-fold losses: coefficients are arithmetic means, per-row
//! terms are concatenated at 1/R weight, n_eff is the total row count.
TaskLoss crossfit_average(const std::vector<TaskLoss>& fold_losses);

//! Cross-fitted oracle: value/gradient/Hessian are means over the R fold
//! oracles; n_eff accumulates every fold observation once.
SmoothLossOracle crossfit_loss(const std::vector<SmoothLossOracle>& per_fold, int R);

enum class LossForm { orthogonal, plugin };

//! Empirical nuisance-perturbation diagnostic: with predictions shifted by
//! direction_scale * tanh(sum_r x_r), returns
//!   || grad f(theta*, eta + eps h) - grad f(theta*, eta) || / (eps * n).
//! truth holds the model's per-row true nuisance predictions; passing null
//! raises RequiresTruth (only simulation knows the truth).
double orthogonality_diagnostic(ModelKind model, const TaskDataset& data,
                                const std::map<std::string, Vec>* truth, double theta_star,
                                double direction_scale, LossForm form = LossForm::orthogonal);

}  // namespace orthofuse

#endif  // ORTHOFUSE_LOSS_HPP_
