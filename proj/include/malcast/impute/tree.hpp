#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "malcast/core/matrix.hpp"
#include "malcast/core/rng.hpp"
#include "malcast/error.hpp"

namespace malcast {

struct TreeParams {
  std::size_t max_depth = 0;  // 0 = unbounded
  std::size_t min_samples_leaf = 1;
  std::size_t mtry = 0;  // features tried per split; 0 = all
};

/// CART regression tree grown greedily on squared-error reduction. Among
/// equally good splits the lowest feature index wins, then the lowest
/// threshold.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };

  RegressionTree() = default;

  /// Fits on all rows of `x`.
  static RegressionTree fit(const Matrix& x, std::span<const double> y, const TreeParams& params, Rng& rng) {
    std::vector<std::size_t> rows(x.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return fit_rows(x, y, rows, params, rng);
  }

  /// Fits on a row multiset (duplicates allowed, as produced by bootstrapping).
  static RegressionTree fit_rows(const Matrix& x, std::span<const double> y, std::vector<std::size_t> rows,
                                 const TreeParams& params, Rng& rng) {
    if (x.rows() != y.size())
      throw ShapeError("fit_tree: " + std::to_string(x.rows()) + " feature rows vs " + std::to_string(y.size()) +
                       " targets");
    if (rows.empty() || x.cols() == 0) throw ArgumentError("fit_tree: empty input");
    RegressionTree t;
    t.width_ = x.cols();
    Builder b{x, y, params, rng, t};
    b.grow(rows, 0);
    return t;
  }

  double predict(std::span<const double> row) const {
    if (row.size() != width_)
      throw ShapeError("tree predict: row width " + std::to_string(row.size()) + " != " + std::to_string(width_));
    int n = 0;
    while (nodes_[n].feature >= 0) {
      const auto& node = nodes_[n];
      n = row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    return nodes_[n].value;
  }

  Vector predict(const Matrix& x) const {
    Vector out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict(x.row(r));
    return out;
  }

  std::size_t depth() const { return nodes_.empty() ? 0 : depth_from(0); }
  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
  }
  std::size_t width() const noexcept { return width_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

 private:
  std::size_t depth_from(int n) const {
    const auto& node = nodes_[n];
    if (node.feature < 0) return 0;
    return 1 + std::max(depth_from(node.left), depth_from(node.right));
  }

  struct Builder {
    const Matrix& x;
    std::span<const double> y;
    const TreeParams& params;
    Rng& rng;
    RegressionTree& tree;

    int grow(std::vector<std::size_t>& rows, std::size_t depth) {
      const int id = static_cast<int>(tree.nodes_.size());
      tree.nodes_.push_back({});
      const double n = static_cast<double>(rows.size());
      double sum = 0.0;
      for (auto r : rows) sum += y[r];
      const double mean = sum / n;
      tree.nodes_[id].value = mean;

      const std::size_t min_leaf = std::max<std::size_t>(1, params.min_samples_leaf);
      const bool depth_capped = params.max_depth != 0 && depth >= params.max_depth;
      bool constant = true;
      for (auto r : rows)
        if (y[r] != y[rows.front()]) {
          constant = false;
          break;
        }
      if (depth_capped || constant || rows.size() < 2 * min_leaf) return id;

      const std::size_t p = x.cols();
      std::vector<std::size_t> features;
      if (params.mtry == 0 || params.mtry >= p) {
        features.resize(p);
        std::iota(features.begin(), features.end(), std::size_t{0});
      } else {
        features = rng.choice(p, params.mtry);
        std::sort(features.begin(), features.end());
      }

      // Maximising sum_l^2/n_l + sum_r^2/n_r is equivalent to minimising child SSE.
      const double parent_score = sum * sum / n;
      double best_score = parent_score;
      int best_feature = -1;
      double best_threshold = 0.0;
      std::vector<std::size_t> order(rows);
      for (auto f : features) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
        double left_sum = 0.0;
        for (std::size_t k = 1; k < order.size(); ++k) {
          left_sum += y[order[k - 1]];
          const double lo = x(order[k - 1], f), hi = x(order[k], f);
          if (k < min_leaf || order.size() - k < min_leaf || !(lo < hi)) continue;
          const double nl = static_cast<double>(k), nr = n - nl;
          const double right_sum = sum - left_sum;
          const double score = left_sum * left_sum / nl + right_sum * right_sum / nr;
          if (score > best_score) {
            best_score = score;
            best_feature = static_cast<int>(f);
            double t = lo + 0.5 * (hi - lo);
            if (!(t < hi)) t = lo;
            best_threshold = t;
          }
        }
      }
      if (best_feature < 0) return id;

      std::vector<std::size_t> left, right;
      for (auto r : rows) (x(r, static_cast<std::size_t>(best_feature)) <= best_threshold ? left : right).push_back(r);
      rows.clear();
      rows.shrink_to_fit();
      const int l = grow(left, depth + 1);
      const int r = grow(right, depth + 1);
      auto& node = tree.nodes_[id];
      node.feature = best_feature;
      node.threshold = best_threshold;
      node.left = l;
      node.right = r;
      return id;
    }
  };

  std::vector<Node> nodes_;
  std::size_t width_ = 0;
};

inline RegressionTree fit_tree(const Matrix& x, std::span<const double> y, const TreeParams& params, Rng& rng) {
  return RegressionTree::fit(x, y, params, rng);
}

}  // namespace malcast
