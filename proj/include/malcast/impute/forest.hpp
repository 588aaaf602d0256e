#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "malcast/core/matrix.hpp"
#include "malcast/core/rng.hpp"
#include "malcast/impute/tree.hpp"

namespace malcast {

struct ForestParams {
  std::size_t n_trees = 100;
  TreeParams tree{.max_depth = 0, .min_samples_leaf = 5, .mtry = 0};  // mtry 0 -> ceil(sqrt(p))
  bool bootstrap = true;
};

/// Bagged regression trees; prediction is the mean over trees. Tree k draws
/// from its own generator seeded by (base seed, k), so the fitted forest does
/// not depend on the order trees are built in.
class RandomForest {
 public:
  static RandomForest fit(const Matrix& x, std::span<const double> y, const ForestParams& params, Rng& rng) {
    if (params.n_trees < 1) throw ArgumentError("forest_fit: n_trees must be >= 1");
    if (x.rows() != y.size())
      throw ShapeError("forest_fit: " + std::to_string(x.rows()) + " rows vs " + std::to_string(y.size()) + " targets");
    if (x.rows() == 0 || x.cols() == 0) throw ArgumentError("forest_fit: empty input");
    TreeParams tp = params.tree;
    if (tp.mtry == 0) tp.mtry = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.cols()))));
    RandomForest f;
    f.width_ = x.cols();
    f.mtry_ = tp.mtry;
    f.seed_ = rng();
    f.trees_.reserve(params.n_trees);
    const std::size_t n = x.rows();
    for (std::size_t k = 0; k < params.n_trees; ++k) {
      Rng tree_rng(derive_seed(f.seed_, k));
      std::vector<std::size_t> rows(n);
      for (std::size_t i = 0; i < n; ++i) rows[i] = params.bootstrap ? tree_rng.index(n) : i;
      f.trees_.push_back(RegressionTree::fit_rows(x, y, std::move(rows), tp, tree_rng));
    }
    return f;
  }

  double predict(std::span<const double> row) const {
    if (row.size() != width_)
      throw ShapeError("forest_predict: row width " + std::to_string(row.size()) + " != " + std::to_string(width_));
    double acc = 0.0;
    for (const auto& t : trees_) acc += t.predict(row);
    return acc / static_cast<double>(trees_.size());
  }

  Vector predict(const Matrix& x) const {
    if (x.cols() != width_)
      throw ShapeError("forest_predict: matrix " + x.shape_string() + " vs forest width " + std::to_string(width_));
    Vector out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict(x.row(r));
    return out;
  }

  std::size_t n_trees() const noexcept { return trees_.size(); }
  std::size_t mtry() const noexcept { return mtry_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<RegressionTree>& trees() const noexcept { return trees_; }

 private:
  std::vector<RegressionTree> trees_;
  std::size_t width_ = 0;
  std::size_t mtry_ = 0;
  std::uint64_t seed_ = 0;
};

inline RandomForest forest_fit(const Matrix& x, std::span<const double> y, const ForestParams& params, Rng& rng) {
  return RandomForest::fit(x, y, params, rng);
}

inline Vector forest_predict(const RandomForest& f, const Matrix& x) { return f.predict(x); }

}  // namespace malcast
