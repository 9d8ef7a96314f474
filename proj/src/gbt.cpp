#include "orthofuse/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace orthofuse {

double GbtTree::predict_row(const Matrix& x, int row) const {
  int i = 0;
  while (nodes[i].feature >= 0)
    i = (x(row, nodes[i].feature) <= nodes[i].threshold) ? nodes[i].left : nodes[i].right;
  return nodes[i].value;
}

double GbtModel::score_row(const Matrix& x, int row) const {
  double f = base_score;
  for (const auto& t : trees) f += learning_rate * t.predict_row(x, row);
  return f;
}

namespace {

struct SplitChoice {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

// One boosting tree fit to (gradient, hessian) targets. Leaf value is the
// Newton step sum(g)/sum(h); for squared error h == 1 and this is the mean.
// Split search is level-synchronous: per feature one pass over the presorted
// row order handles every open node at the current depth.
class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const std::vector<int>& rows,
              const std::vector<std::vector<int>>& order, int max_depth, int min_leaf)
      : x_(x), rows_(rows), order_(order), max_depth_(max_depth), min_leaf_(min_leaf) {}

  GbtTree build(const Vec& grad, const Vec& hess) {
    GbtTree tree;
    node_of_.assign(x_.rows(), -1);
    for (int r : rows_) node_of_[r] = 0;
    tree.nodes.push_back({});

    struct NodeStat {
      double g = 0, h = 0;
      int count = 0;
    };
    std::vector<NodeStat> stats(1);
    for (int r : rows_) {
      stats[0].g += grad[r];
      stats[0].h += hess[r];
      stats[0].count += 1;
    }

    std::vector<int> open{0};
    for (int depth = 0; depth < max_depth_ && !open.empty(); ++depth) {
      std::vector<SplitChoice> best(tree.nodes.size());
      std::vector<char> is_open(tree.nodes.size(), 0);
      for (int id : open) is_open[id] = 1;

      const int p = x_.cols();
      std::vector<double> run_g(tree.nodes.size()), run_h(tree.nodes.size());
      std::vector<int> run_n(tree.nodes.size());
      std::vector<double> prev_val(tree.nodes.size());
      std::vector<char> started(tree.nodes.size());
      for (int f = 0; f < p; ++f) {
        for (int id : open) {
          run_g[id] = run_h[id] = 0.0;
          run_n[id] = 0;
          started[id] = 0;
        }
        for (int r : order_[f]) {
          const int id = node_of_[r];
          if (id < 0 || !is_open[id]) continue;
          const double v = x_(r, f);
          // candidate boundary sits between distinct consecutive values
          if (started[id] && v > prev_val[id] && run_n[id] >= min_leaf_ &&
              stats[id].count - run_n[id] >= min_leaf_) {
            const double gl = run_g[id], hl = run_h[id];
            const double gr = stats[id].g - gl, hr = stats[id].h - hl;
            const double gain =
                gl * gl / std::max(hl, 1e-12) + gr * gr / std::max(hr, 1e-12) -
                stats[id].g * stats[id].g / std::max(stats[id].h, 1e-12);
            if (gain > best[id].gain + 1e-15) {
              best[id] = {gain, f, 0.5 * (prev_val[id] + v)};
            }
          }
          run_g[id] += grad[r];
          run_h[id] += hess[r];
          run_n[id] += 1;
          prev_val[id] = v;
          started[id] = 1;
        }
      }

      std::vector<int> next_open;
      for (int id : open) {
        if (best[id].feature < 0) continue;
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes.push_back({});
        tree.nodes[id].feature = best[id].feature;
        tree.nodes[id].threshold = best[id].threshold;
        tree.nodes[id].left = left;
        tree.nodes[id].right = left + 1;
        stats.resize(tree.nodes.size());
        next_open.push_back(left);
        next_open.push_back(left + 1);
      }
      if (next_open.empty()) break;
      // reassign rows of split nodes to their children
      for (int r : rows_) {
        int id = node_of_[r];
        if (id < 0 || tree.nodes[id].feature < 0) continue;
        id = (x_(r, tree.nodes[id].feature) <= tree.nodes[id].threshold) ? tree.nodes[id].left
                                                                         : tree.nodes[id].right;
        node_of_[r] = id;
        stats[id].g += grad[r];
        stats[id].h += hess[r];
        stats[id].count += 1;
      }
      open = std::move(next_open);
      best.clear();
    }

    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      if (tree.nodes[i].feature < 0)
        tree.nodes[i].value = stats[i].h > 0 ? stats[i].g / stats[i].h : 0.0;
    }
    return tree;
  }

  const std::vector<int>& node_of() const { return node_of_; }

 private:
  const Matrix& x_;
  const std::vector<int>& rows_;
  const std::vector<std::vector<int>>& order_;
  int max_depth_;
  int min_leaf_;
  std::vector<int> node_of_;
};

std::vector<std::vector<int>> presort(const Matrix& x, const std::vector<int>& rows) {
  std::vector<std::vector<int>> order(x.cols());
  for (int f = 0; f < x.cols(); ++f) {
    order[f] = rows;
    std::stable_sort(order[f].begin(), order[f].end(),
                     [&](int a, int b) { return x(a, f) < x(b, f); });
  }
  return order;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

GbtModel gbt_fit_regression(const Matrix& x, const Vec& y, const std::vector<int>& rows,
                            const GbtParams& p) {
  GbtModel model;
  model.logistic = false;
  model.learning_rate = p.learning_rate;
  double s = 0;
  for (int r : rows) s += y[r];
  model.base_score = rows.empty() ? 0.0 : s / static_cast<double>(rows.size());

  Vec f(x.rows(), model.base_score);
  Vec grad(x.rows(), 0.0), hess(x.rows(), 1.0);
  const auto order = presort(x, rows);
  TreeBuilder builder(x, rows, order, p.max_depth, p.min_leaf);

  auto loss = [&] {
    double l = 0;
    for (int r : rows) l += (y[r] - f[r]) * (y[r] - f[r]);
    return l / std::max<std::size_t>(rows.size(), 1);
  };
  model.train_curve.push_back(loss());

  for (int t = 0; t < p.trees; ++t) {
    for (int r : rows) grad[r] = y[r] - f[r];
    GbtTree tree = builder.build(grad, hess);
    for (int r : rows) f[r] += p.learning_rate * tree.predict_row(x, r);
    model.trees.push_back(std::move(tree));
    model.train_curve.push_back(loss());
  }
  return model;
}

GbtModel gbt_fit_logistic(const Matrix& x, const Vec& d, const std::vector<int>& rows,
                          const GbtParams& p) {
  GbtModel model;
  model.logistic = true;
  model.learning_rate = p.learning_rate;
  double s = 0;
  for (int r : rows) s += d[r];
  const double freq =
      std::clamp(rows.empty() ? 0.5 : s / static_cast<double>(rows.size()), 1e-6, 1.0 - 1e-6);
  model.base_score = std::log(freq / (1.0 - freq));

  Vec f(x.rows(), model.base_score);
  Vec grad(x.rows(), 0.0), hess(x.rows(), 0.0);
  const auto order = presort(x, rows);
  TreeBuilder builder(x, rows, order, p.max_depth, p.min_leaf);

  auto loss = [&] {
    double l = 0;
    for (int r : rows) {
      const double q = sigmoid(f[r]);
      l -= d[r] * std::log(std::max(q, 1e-12)) + (1.0 - d[r]) * std::log(std::max(1.0 - q, 1e-12));
    }
    return l / std::max<std::size_t>(rows.size(), 1);
  };
  model.train_curve.push_back(loss());

  for (int t = 0; t < p.trees; ++t) {
    for (int r : rows) {
      const double q = sigmoid(f[r]);
      grad[r] = d[r] - q;
      hess[r] = std::max(q * (1.0 - q), 1e-6);
    }
    GbtTree tree = builder.build(grad, hess);
    for (int r : rows) f[r] += p.learning_rate * tree.predict_row(x, r);
    model.trees.push_back(std::move(tree));
    model.train_curve.push_back(loss());
  }
  return model;
}

}  // namespace orthofuse
