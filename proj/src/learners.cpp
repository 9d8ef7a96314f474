#include "orthofuse/learners.hpp"

#include <algorithm>
#include <cmath>

#include "orthofuse/errors.hpp"

namespace orthofuse {

const char* learner_name(LearnerKind k) {
  switch (k) {
    case LearnerKind::gbt_regressor: return "gbt_regressor";
    case LearnerKind::gbt_classifier: return "gbt_classifier";
    case LearnerKind::ridge: return "ridge";
    case LearnerKind::constant: return "constant";
  }
  return "?";
}

LearnerKind learner_from_name(const std::string& s) {
  if (s == "gbt_regressor" || s == "gbt") return LearnerKind::gbt_regressor;
  if (s == "gbt_classifier") return LearnerKind::gbt_classifier;
  if (s == "ridge") return LearnerKind::ridge;
  if (s == "constant") return LearnerKind::constant;
  throw Error(Errc::invalid_config, "unknown learner '" + s + "'");
}

void NuisanceLearnerSpec::validate() const {
  if (trees < 1) throw Error(Errc::invalid_spec, "learner: trees must be >= 1");
  if (max_depth < 1) throw Error(Errc::invalid_spec, "learner: max_depth must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0))
    throw Error(Errc::invalid_spec, "learner: learning_rate must be in (0,1]");
  if (min_leaf < 1) throw Error(Errc::invalid_spec, "learner: min_leaf must be >= 1");
  if (l2_penalty < 0.0) throw Error(Errc::invalid_spec, "learner: l2_penalty must be >= 0");
}

namespace {

bool all_equal(const Vec& y, const std::vector<int>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (y[rows[i]] != y[rows[0]]) return false;
  return true;
}

NuisanceFit fit_ridge(const NuisanceLearnerSpec& spec, const Matrix& x, const Vec& y,
                      const std::vector<int>& rows) {
  const int p = x.cols();
  const int n = static_cast<int>(rows.size());
  NuisanceFit fit;
  fit.kind = LearnerKind::ridge;
  fit.n_features = p;
  fit.ridge_center.assign(p, 0.0);
  for (int r : rows)
    for (int j = 0; j < p; ++j) fit.ridge_center[j] += x(r, j);
  for (int j = 0; j < p; ++j) fit.ridge_center[j] /= n;
  double ybar = 0;
  for (int r : rows) ybar += y[r];
  ybar /= n;

  Matrix gram(p, p);
  Vec xty(p, 0.0);
  for (int r : rows) {
    for (int j = 0; j < p; ++j) {
      const double xj = x(r, j) - fit.ridge_center[j];
      xty[j] += xj * (y[r] - ybar);
      for (int k = j; k < p; ++k) gram(j, k) += xj * (x(r, k) - fit.ridge_center[k]);
    }
  }
  for (int j = 0; j < p; ++j)
    for (int k = 0; k < j; ++k) gram(j, k) = gram(k, j);
  for (int j = 0; j < p; ++j) gram(j, j) += std::max(spec.l2_penalty, 1e-10);
  fit.ridge_beta = solve_spd(gram, xty);
  fit.intercept = ybar;
  return fit;
}

}  // namespace

NuisanceFit fit_regressor(const NuisanceLearnerSpec& spec, const Matrix& x, const Vec& y,
                          const std::vector<int>& rows, Rng& /*rng*/) {
  spec.validate();
  if (rows.empty()) throw Error(Errc::empty_data, "fit_regressor: no rows");
  if (x.rows() != static_cast<int>(y.size()))
    throw Error(Errc::dimension_mismatch, "fit_regressor: rows(X) != len(y)");

  NuisanceFit fit;
  switch (spec.kind) {
    case LearnerKind::constant: {
      fit.kind = LearnerKind::constant;
      double s = 0;
      for (int r : rows) s += y[r];
      fit.intercept = s / static_cast<double>(rows.size());
      fit.n_features = x.cols();
      break;
    }
    case LearnerKind::ridge:
      fit = fit_ridge(spec, x, y, rows);
      break;
    case LearnerKind::gbt_regressor:
    case LearnerKind::gbt_classifier: {
      fit.kind = LearnerKind::gbt_regressor;
      if (all_equal(y, rows)) fit.warning = "degenerate target: all responses equal";
      GbtParams p{spec.trees, spec.max_depth, spec.learning_rate, spec.min_leaf};
      fit.gbt = std::make_shared<GbtModel>(gbt_fit_regression(x, y, rows, p));
      fit.n_features = x.cols();
      break;
    }
  }
  fit.trained_rows = rows;
  return fit;
}

NuisanceFit fit_classifier(const NuisanceLearnerSpec& spec, const Matrix& x, const Vec& d,
                           std::pair<double, double> clip, const std::vector<int>& rows,
                           Rng& /*rng*/) {
  spec.validate();
  if (rows.empty()) throw Error(Errc::empty_data, "fit_classifier: no rows");
  if (!(clip.first > 0.0 && clip.first < clip.second && clip.second < 1.0))
    throw Error(Errc::invalid_spec, "fit_classifier: need 0 < lo < hi < 1");
  for (int r : rows)
    if (d[r] != 0.0 && d[r] != 1.0)
      throw Error(Errc::invalid_spec, "fit_classifier: target must be binary");

  NuisanceFit fit;
  fit.clip_bounds = clip;
  fit.trained_rows = rows;
  fit.n_features = x.cols();

  if (all_equal(d, rows)) {
    fit.kind = LearnerKind::constant;
    fit.intercept = d[rows[0]];  // clipped at predict time
    fit.warning = "single class: constant clipped class frequency";
    return fit;
  }

  switch (spec.kind) {
    case LearnerKind::constant: {
      fit.kind = LearnerKind::constant;
      double s = 0;
      for (int r : rows) s += d[r];
      fit.intercept = s / static_cast<double>(rows.size());
      break;
    }
    case LearnerKind::ridge: {
      // linear probability fit, clipped at predict time
      NuisanceFit r = fit_ridge(spec, x, d, rows);
      r.clip_bounds = clip;
      r.trained_rows = rows;
      return r;
    }
    case LearnerKind::gbt_regressor:
    case LearnerKind::gbt_classifier: {
      fit.kind = LearnerKind::gbt_classifier;
      GbtParams p{spec.trees, spec.max_depth, spec.learning_rate, spec.min_leaf};
      fit.gbt = std::make_shared<GbtModel>(gbt_fit_logistic(x, d, rows, p));
      break;
    }
  }
  return fit;
}

Vec predict(const NuisanceFit& fit, const Matrix& x) {
  if (x.cols() != fit.n_features)
    throw Error(Errc::dimension_mismatch, "predict: feature count differs from training");
  const int n = x.rows();
  Vec out(n, 0.0);
  switch (fit.kind) {
    case LearnerKind::constant:
      std::fill(out.begin(), out.end(), fit.intercept);
      break;
    case LearnerKind::ridge:
      for (int r = 0; r < n; ++r) {
        double s = fit.intercept;
        for (int j = 0; j < x.cols(); ++j)
          s += fit.ridge_beta[j] * (x(r, j) - fit.ridge_center[j]);
        out[r] = s;
      }
      break;
    case LearnerKind::gbt_regressor:
      for (int r = 0; r < n; ++r) out[r] = fit.gbt->score_row(x, r);
      break;
    case LearnerKind::gbt_classifier:
      for (int r = 0; r < n; ++r) out[r] = 1.0 / (1.0 + std::exp(-fit.gbt->score_row(x, r)));
      break;
  }
  if (fit.clip_bounds) {
    for (double& v : out) v = std::clamp(v, fit.clip_bounds->first, fit.clip_bounds->second);
  }
  for (double v : out)
    if (!std::isfinite(v)) throw Error(Errc::invalid_spec, "predict: non-finite prediction");
  return out;
}

}  // namespace orthofuse
