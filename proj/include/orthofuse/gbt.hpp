#ifndef ORTHOFUSE_GBT_HPP_
#define ORTHOFUSE_GBT_HPP_

#include <memory>
#include <vector>

#include "orthofuse/linalg.hpp"

namespace orthofuse {

//! Depth-limited regression tree stored as a flat node array.
struct GbtTree {
  struct Node {
    int feature = -1;        // -1 -> leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    double value = 0.0;      // leaf prediction
  };
  std::vector<Node> nodes;

  double predict_row(const Matrix& x, int row) const;
};

//! Exact-greedy gradient boosting: squared-error trees on raw feature
//! values, variance-reduction split criterion, no histogram binning.
//! Classification uses the logistic deviance with per-leaf Newton steps.
struct GbtModel {
  bool logistic = false;
  double base_score = 0.0;
  double learning_rate = 0.1;
  std::vector<GbtTree> trees;
  Vec train_curve;  // training loss after each stage (base model first)

  //! Raw additive score F(x); the logistic link is applied by the caller.
  double score_row(const Matrix& x, int row) const;
};

struct GbtParams {
  int trees = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  int min_leaf = 20;
};

//! Least-squares boosting on the given rows of x.
GbtModel gbt_fit_regression(const Matrix& x, const Vec& y, const std::vector<int>& rows,
                            const GbtParams& p);

//! Logistic boosting for binary targets on the given rows of x.
GbtModel gbt_fit_logistic(const Matrix& x, const Vec& d, const std::vector<int>& rows,
                          const GbtParams& p);

}  // namespace orthofuse

#endif  // ORTHOFUSE_GBT_HPP_
