#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "malcast/core/matrix.hpp"
#include "malcast/core/scaler.hpp"
#include "malcast/data/dataset.hpp"
#include "malcast/error.hpp"

namespace malcast {

enum class Variant { Univariate, Multivariate };

inline std::string_view to_string(Variant v) { return v == Variant::Univariate ? "univariate" : "multivariate"; }

inline Variant parse_variant(std::string_view s) {
  if (s == "univariate") return Variant::Univariate;
  if (s == "multivariate") return Variant::Multivariate;
  throw ArgumentError("unknown variant '" + std::string(s) + "' (expected univariate|multivariate)");
}

/// Feature columns per variant; cases is always the last column.
inline std::size_t feature_width(Variant v) noexcept { return v == Variant::Univariate ? 1 : 5; }

struct WindowSpec {
  std::size_t lookback = 12;
  Variant variant = Variant::Univariate;

  std::size_t features() const noexcept { return feature_width(variant); }
  friend bool operator==(const WindowSpec&, const WindowSpec&) = default;
};

/// Raw feature matrix of a complete series: rows are months; columns are
/// (temp, rainfall, humidity, population, cases) or (cases).
inline Matrix series_features(const Dataset::Series& series, Variant variant) {
  Matrix m(series.size(), feature_width(variant));
  for (std::size_t t = 0; t < series.size(); ++t) {
    const auto& r = series[t];
    if (variant == Variant::Univariate) {
      m(t, 0) = static_cast<double>(r.cases);
      continue;
    }
    if (!r.climate_complete())
      throw PreconditionError("missing climate value for '" + r.province + "' at " + r.month.str() +
                              "; impute before windowing");
    m(t, 0) = *r.temp_mean;
    m(t, 1) = *r.rainfall;
    m(t, 2) = *r.rel_humidity;
    m(t, 3) = static_cast<double>(r.population);
    m(t, 4) = static_cast<double>(r.cases);
  }
  return m;
}

/// Supervised (lookback window -> next-month cases) samples in chronological
/// order. Windows and targets are stored raw; the scalers are fitted on the
/// training samples [0, split) only and applied on access.
struct WindowedDataset {
  WindowSpec spec;
  std::vector<Matrix> inputs;  // each lookback x features, raw
  Vector targets;              // raw case counts
  std::vector<MonthKey> target_months;
  MinMaxScaler input_scaler;
  MinMaxScaler target_scaler;
  std::size_t split = 0;

  std::size_t size() const noexcept { return targets.size(); }
  std::size_t train_size() const noexcept { return split; }
  std::size_t features() const noexcept { return spec.features(); }

  Matrix scaled_input(std::size_t i) const { return input_scaler.transform(inputs.at(i)); }
  double scaled_target(std::size_t i) const { return target_scaler.transform(0, targets.at(i)); }

  std::vector<Matrix> scaled_inputs() const {
    std::vector<Matrix> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(scaled_input(i));
    return out;
  }

  Vector scaled_targets() const {
    Vector out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = scaled_target(i);
    return out;
  }

  /// Raw last observed case count in window i (the persistence forecast).
  double last_cases(std::size_t i) const {
    const auto& w = inputs.at(i);
    return w(w.rows() - 1, w.cols() - 1);
  }

  /// Refits both scalers on samples [0, split).
  void fit_scalers() {
    if (split == 0) throw ArgumentError("windowing: no training samples to fit scalers on");
    Matrix stacked(split * spec.lookback, spec.features());
    for (std::size_t i = 0; i < split; ++i)
      for (std::size_t t = 0; t < spec.lookback; ++t) {
        auto src = inputs[i].row(t);
        std::copy(src.begin(), src.end(), stacked.row(i * spec.lookback + t).begin());
      }
    input_scaler = MinMaxScaler::fit(stacked);
    target_scaler = MinMaxScaler::fit(std::span<const double>(targets.data(), split));
  }
};

/// Windows over a raw feature matrix (rows = months).
inline WindowedDataset make_windows(const Matrix& features, const std::vector<MonthKey>& months,
                                    const WindowSpec& spec) {
  if (spec.lookback < 1) throw ArgumentError("windowing: lookback must be >= 1");
  if (features.cols() != spec.features())
    throw ShapeError("windowing: feature matrix " + features.shape_string() + " does not match variant width " +
                     std::to_string(spec.features()));
  if (months.size() != features.rows()) throw ShapeError("windowing: month list length != feature rows");
  const std::size_t n = features.rows();
  if (n <= spec.lookback)
    throw ArgumentError("windowing: series of " + std::to_string(n) + " months is too short for lookback " +
                        std::to_string(spec.lookback) + " (need at least " + std::to_string(spec.lookback + 1) + ")");
  for (double v : features.data())
    if (!std::isfinite(v)) throw ArgumentError("windowing: series contains non-finite values");
  WindowedDataset w;
  w.spec = spec;
  const std::size_t f = spec.features();
  for (std::size_t s = 0; s + spec.lookback < n; ++s) {
    Matrix win(spec.lookback, f);
    for (std::size_t t = 0; t < spec.lookback; ++t) {
      auto src = features.row(s + t);
      std::copy(src.begin(), src.end(), win.row(t).begin());
    }
    w.inputs.push_back(std::move(win));
    w.targets.push_back(features(s + spec.lookback, f - 1));
    w.target_months.push_back(months[s + spec.lookback]);
  }
  w.split = w.size();
  w.fit_scalers();
  return w;
}

inline WindowedDataset make_windows(const Dataset::Series& series, const WindowSpec& spec) {
  std::vector<MonthKey> months;
  for (const auto& r : series) months.push_back(r.month);
  return make_windows(series_features(series, spec.variant), months, spec);
}

/// Chronological split: the first floor(fraction * samples) samples train.
/// Both halves carry scalers fitted on the training half only, so test
/// inputs may fall outside [0, 1].
inline std::pair<WindowedDataset, WindowedDataset> split_train_test(const WindowedDataset& w, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ArgumentError("split: train fraction must lie in (0, 1)");
  const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(w.size())));
  if (n_train == 0 || n_train >= w.size())
    throw ArgumentError("split: fraction " + std::to_string(train_fraction) + " of " + std::to_string(w.size()) +
                        " samples leaves an empty partition");
  WindowedDataset all = w;
  all.split = n_train;
  all.fit_scalers();

  auto slice = [&](std::size_t begin, std::size_t end) {
    WindowedDataset part;
    part.spec = all.spec;
    part.inputs.assign(all.inputs.begin() + begin, all.inputs.begin() + end);
    part.targets.assign(all.targets.begin() + begin, all.targets.begin() + end);
    part.target_months.assign(all.target_months.begin() + begin, all.target_months.begin() + end);
    part.input_scaler = all.input_scaler;
    part.target_scaler = all.target_scaler;
    return part;
  };
  auto train = slice(0, n_train);
  train.split = n_train;
  auto test = slice(n_train, all.size());
  test.split = 0;
  return {std::move(train), std::move(test)};
}

}  // namespace malcast
