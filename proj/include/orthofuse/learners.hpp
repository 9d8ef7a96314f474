#ifndef ORTHOFUSE_LEARNERS_HPP_
#define ORTHOFUSE_LEARNERS_HPP_

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "orthofuse/gbt.hpp"
#include "orthofuse/linalg.hpp"
#include "orthofuse/rng.hpp"

namespace orthofuse {

enum class LearnerKind { gbt_regressor, gbt_classifier, ridge, constant };

const char* learner_name(LearnerKind k);
LearnerKind learner_from_name(const std::string& s);

struct NuisanceLearnerSpec {
  LearnerKind kind = LearnerKind::gbt_regressor;
  int trees = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  int min_leaf = 20;
  double l2_penalty = 1.0;  // ridge only

  void validate() const;  // throws Error(invalid_spec)
  bool operator==(const NuisanceLearnerSpec&) const = default;
};

//! A fitted nuisance predictor. The model payload is opaque to callers;
//! trained_rows records exactly which rows the fit saw (fold discipline is
//! asserted against it in tests and in the pipeline).
struct NuisanceFit {
  LearnerKind kind = LearnerKind::constant;
  std::optional<std::pair<double, double>> clip_bounds;  // classifier output clipping
  std::vector<int> trained_rows;
  std::string warning;  // SingleClass / DegenerateTarget notes, empty if clean

  std::shared_ptr<const GbtModel> gbt;
  Vec ridge_beta;       // ridge: coefficients on centered features
  Vec ridge_center;     // feature means at fit time
  double intercept = 0; // ridge/constant
  int n_features = 0;
};

//! Least-squares fit of y on X restricted to rows (gbt / ridge / constant).
NuisanceFit fit_regressor(const NuisanceLearnerSpec& spec, const Matrix& x, const Vec& y,
                          const std::vector<int>& rows, Rng& rng);

//! Probability model for a binary target; predictions are clipped to
//! [clip.first, clip.second] at predict time. A single-class target degrades
//! to the clipped class frequency with a warning instead of failing.
NuisanceFit fit_classifier(const NuisanceLearnerSpec& spec, const Matrix& x, const Vec& d,
                           std::pair<double, double> clip, const std::vector<int>& rows, Rng& rng);

//! Predictions for every row of x.
Vec predict(const NuisanceFit& fit, const Matrix& x);

}  // namespace orthofuse

#endif  // ORTHOFUSE_LEARNERS_HPP_
