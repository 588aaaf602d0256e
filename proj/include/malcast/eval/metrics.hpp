#pragma once

#include <cmath>
#include <span>
#include <string>
#include <utility>

#include "malcast/core/matrix.hpp"
#include "malcast/error.hpp"
#include "malcast/window/windowing.hpp"

namespace malcast {

inline double rmse(std::span<const double> observed, std::span<const double> predicted) {
  if (observed.empty()) throw ArgumentError("rmse: empty series");
  if (observed.size() != predicted.size())
    throw ArgumentError("rmse: " + std::to_string(observed.size()) + " observed vs " +
                        std::to_string(predicted.size()) + " predicted");
  double acc = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - predicted[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(observed.size()));
}

/// Repeats the last observed case count of each window.
inline Vector persistence_baseline(const WindowedDataset& windows) {
  Vector out(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) out[i] = windows.last_cases(i);
  return out;
}

/// Same forecast from a bare case series: predictions for targets
/// lookback..N-1, each the preceding month's value.
inline Vector persistence_baseline(std::span<const double> cases, std::size_t lookback) {
  if (lookback < 1 || cases.size() <= lookback)
    throw ArgumentError("persistence_baseline: series shorter than lookback + 1");
  Vector out;
  for (std::size_t t = lookback; t < cases.size(); ++t) out.push_back(cases[t - 1]);
  return out;
}

inline double sum(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc;
}

}  // namespace malcast
