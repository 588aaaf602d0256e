#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "malcast/core/matrix.hpp"
#include "malcast/core/rng.hpp"
#include "malcast/data/dataset.hpp"
#include "malcast/impute/forest.hpp"

namespace malcast {

/// Missing entries in imputation matrices are NaN.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) noexcept { return std::isnan(v); }

struct MissForestParams {
  ForestParams forest{};
  std::size_t max_iter = 10;
};

struct ImputationResult {
  Matrix completed;
  std::size_t iterations_run = 0;
  /// Change statistic of the last iteration computed.
  double final_delta = 0.0;
  /// Change statistic per iteration, in order.
  std::vector<double> deltas;
};

/// Normalised squared change over the imputed positions:
/// sum (new - old)^2 / sum new^2.
inline double imputation_delta(const Matrix& next, const Matrix& prev, const std::vector<std::size_t>& positions) {
  double num = 0.0, den = 0.0;
  const auto a = next.data();
  const auto b = prev.data();
  for (auto i : positions) {
    const double d = a[i] - b[i];
    num += d * d;
    den += a[i] * a[i];
  }
  if (den == 0.0) return num;
  return num / den;
}

/// Iterative random-forest imputation for continuous columns.
///
/// Missing cells start at their column mean. Each iteration visits the
/// columns that have missing cells, fewest missing first; for each it fits a
/// forest on the rows where the column is observed (all other columns as
/// features, using current imputations) and overwrites the missing cells
/// with the forest's predictions. Iteration stops once the change statistic
/// fails to decrease, in which case the previous iterate is returned, or
/// after `max_iter` iterations, in which case the last iterate is returned.
/// Observed cells are never written.
inline ImputationResult missforest_impute(const Matrix& x, const MissForestParams& params, Rng& rng) {
  if (params.max_iter < 1) throw ArgumentError("missforest: max_iter must be >= 1");
  const std::size_t n = x.rows(), p = x.cols();
  if (p < 2) throw ArgumentError("missforest: need at least 2 columns");
  if (n == 0) throw ArgumentError("missforest: empty matrix");

  std::vector<std::vector<std::size_t>> missing_rows(p);
  std::vector<std::size_t> positions;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c)
      if (is_missing(x(r, c))) {
        missing_rows[c].push_back(r);
        positions.push_back(r * p + c);
      }

  ImputationResult result;
  result.completed = x;
  if (positions.empty()) return result;

  Matrix current = x;
  for (std::size_t c = 0; c < p; ++c) {
    if (missing_rows[c].size() == n)
      throw ArgumentError("missforest: column " + std::to_string(c) + " has no observed entries");
    if (missing_rows[c].empty()) continue;
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r)
      if (!is_missing(x(r, c))) sum += x(r, c);
    const double mean = sum / static_cast<double>(n - missing_rows[c].size());
    for (auto r : missing_rows[c]) current(r, c) = mean;
  }

  std::vector<std::size_t> order;
  for (std::size_t c = 0; c < p; ++c)
    if (!missing_rows[c].empty()) order.push_back(c);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return missing_rows[a].size() < missing_rows[b].size(); });

  double delta_old = std::numeric_limits<double>::infinity();
  Matrix previous;
  for (std::size_t iter = 0; iter < params.max_iter; ++iter) {
    previous = current;
    for (auto c : order) {
      const auto& miss = missing_rows[c];
      Matrix train(n - miss.size(), p - 1);
      Vector target;
      target.reserve(n - miss.size());
      Matrix query(miss.size(), p - 1);
      std::size_t ti = 0, qi = 0, mi = 0;
      for (std::size_t r = 0; r < n; ++r) {
        const bool is_query = mi < miss.size() && miss[mi] == r;
        auto dst = is_query ? query.row(qi++) : train.row(ti++);
        for (std::size_t k = 0, j = 0; k < p; ++k)
          if (k != c) dst[j++] = current(r, k);
        if (is_query)
          ++mi;
        else
          target.push_back(current(r, c));
      }
      const auto forest = RandomForest::fit(train, target, params.forest, rng);
      const auto pred = forest.predict(query);
      for (std::size_t i = 0; i < miss.size(); ++i) current(miss[i], c) = pred[i];
    }
    ++result.iterations_run;
    const double delta = imputation_delta(current, previous, positions);
    result.deltas.push_back(delta);
    result.final_delta = delta;
    if (!(delta < delta_old)) {
      result.completed = previous;
      return result;
    }
    delta_old = delta;
  }
  result.completed = current;
  return result;
}

/// Per-province record of an imputation run.
struct ProvinceImputationLog {
  std::string province;
  std::size_t missing = 0;
  std::size_t iterations_run = 0;
  double final_delta = 0.0;
};

/// Imputes the three climate columns of every province independently. The
/// forest sees temperature, rainfall, humidity and the month of year encoded
/// as (sin, cos). Each province draws from a generator derived from `seed`
/// and its name.
inline Dataset impute_dataset(const Dataset& d, const MissForestParams& params, std::uint64_t seed,
                              std::vector<ProvinceImputationLog>* log = nullptr) {
  std::vector<MonthlyRecord> out;
  for (const auto& [name, series] : d.all_series()) {
    const std::size_t n = series.size();
    Matrix m(n, 5);
    std::size_t missing = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const auto& r = series[t];
      m(t, 0) = r.temp_mean.value_or(kMissing);
      m(t, 1) = r.rainfall.value_or(kMissing);
      m(t, 2) = r.rel_humidity.value_or(kMissing);
      const double angle = 2.0 * std::numbers::pi * (r.month.month - 1) / 12.0;
      m(t, 3) = std::sin(angle);
      m(t, 4) = std::cos(angle);
      missing += !r.temp_mean + !r.rainfall + !r.rel_humidity;
    }
    Rng rng(derive_seed(seed, name));
    ImputationResult res;
    try {
      res = missforest_impute(m, params, rng);
    } catch (const ArgumentError& e) {
      throw ArgumentError("province '" + name + "': " + e.what());
    }
    for (std::size_t t = 0; t < n; ++t) {
      MonthlyRecord r = series[t];
      if (!r.temp_mean) r.temp_mean = res.completed(t, 0);
      if (!r.rainfall) r.rainfall = res.completed(t, 1);
      if (!r.rel_humidity) r.rel_humidity = res.completed(t, 2);
      out.push_back(std::move(r));
    }
    if (log) log->push_back({name, missing, res.iterations_run, res.final_delta});
  }
  return Dataset::from_records(d.scheme(), std::move(out));
}

}  // namespace malcast
