#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "malcast/core/rng.hpp"
#include "malcast/error.hpp"
#include "malcast/lstm/adam.hpp"
#include "malcast/lstm/network.hpp"
#include "malcast/lstm/params.hpp"
#include "malcast/window/windowing.hpp"

namespace malcast {

struct TrainConfig {
  std::size_t hidden = 32;
  std::size_t epochs = 300;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 0;  // 0 = full batch
  std::uint64_t seed = 0;
  double clip_norm = 5.0;

  AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon, clip_norm}; }

  void validate() const {
    if (hidden < 1) throw ArgumentError("train config: hidden must be >= 1");
    if (!(learning_rate > 0.0)) throw ArgumentError("train config: learning_rate must be > 0");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
      throw ArgumentError("train config: beta1 and beta2 must lie in (0, 1)");
    if (!(epsilon > 0.0)) throw ArgumentError("train config: epsilon must be > 0");
    if (!(clip_norm > 0.0)) throw ArgumentError("train config: clip_norm must be > 0");
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// A fitted forecaster together with everything needed to apply it to raw
/// case-count windows.
struct TrainedModel {
  std::string region;
  double train_fraction = 0.8;
  WindowSpec spec;
  TrainConfig config;
  LstmParams params;
  MinMaxScaler input_scaler;
  MinMaxScaler target_scaler;
  Vector loss_history;  // mean scaled-unit MSE per epoch

  /// Scaled network output -> case count, clamped at zero.
  double to_case_count(double scaled_output) const {
    return std::max(0.0, target_scaler.inverse(0, scaled_output));
  }

  friend bool operator==(const TrainedModel&, const TrainedModel&) = default;
};

/// Initial parameters `train` starts from for this configuration.
inline LstmParams initial_params(std::size_t features, const TrainConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, "init"));
  return LstmParams::random(features, cfg.hidden, rng);
}

/// Fits an LSTM on the training samples of `data` ([0, split)) with Adam
/// over full BPTT. Targets are learned in scaled units.
inline TrainedModel train(const WindowedDataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.train_size() == 0) throw ArgumentError("train: empty training partition");
  TrainedModel model;
  model.spec = data.spec;
  model.config = cfg;
  model.input_scaler = data.input_scaler;
  model.target_scaler = data.target_scaler;
  model.params = initial_params(data.features(), cfg);

  const std::size_t n = data.train_size();
  std::vector<Matrix> inputs;
  inputs.reserve(n);
  Vector targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    inputs.push_back(data.scaled_input(i));
    targets[i] = data.scaled_target(i);
  }

  const std::size_t batch = cfg.batch_size == 0 ? n : std::min(cfg.batch_size, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng batch_rng(derive_seed(cfg.seed, "batches"));

  auto grads = LstmParams::zeros(model.params.features, model.params.hidden);
  auto moments = AdamMoments::zeros_like(model.params);
  const auto adam = cfg.adam();
  ForwardCache cache;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (batch < n) batch_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      const double loss = batch_loss_and_gradient(model.params, inputs, targets,
                                                  std::span<const std::size_t>(order.data() + start, len), grads, cache);
      if (!std::isfinite(loss))
        throw DivergenceError("training diverged at epoch " + std::to_string(epoch + 1) + " (non-finite loss)");
      epoch_loss += loss * static_cast<double>(len);
      adam_step(model.params, grads, moments, ++step, adam);
    }
    model.loss_history.push_back(epoch_loss / static_cast<double>(n));
  }
  if (!model.params.all_finite()) throw DivergenceError("training produced non-finite parameters");
  return model;
}

inline void require_compatible(const TrainedModel& m, const Matrix& window) {
  if (window.rows() != m.spec.lookback || window.cols() != m.spec.features())
    throw ShapeError("predict: window " + window.shape_string() + " vs model (" + std::to_string(m.spec.lookback) +
                     "x" + std::to_string(m.spec.features()) + ")");
}

/// Forecast for one raw (unscaled) window, in case counts.
inline double predict_window(const TrainedModel& m, const Matrix& raw_window) {
  require_compatible(m, raw_window);
  return m.to_case_count(forward(m.params, m.input_scaler.transform(raw_window)));
}

/// One-step-ahead forecasts for every window of `data` (raw windows are
/// scaled with the model's own scalers).
inline Vector predict(const TrainedModel& m, const WindowedDataset& data) {
  if (data.spec != m.spec) throw ShapeError("predict: window spec differs from the model's");
  Vector out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = predict_window(m, data.inputs[i]);
  return out;
}

/// Recursive multi-step forecast: starting at row `first` of the raw
/// feature matrix, each forecast replaces the observed case count in the
/// windows that follow. Covariates stay observed.
inline Vector predict_recursive(const TrainedModel& m, const Matrix& features, std::size_t first,
                                std::size_t horizon) {
  const std::size_t L = m.spec.lookback, F = m.spec.features();
  if (features.cols() != F) throw ShapeError("predict_recursive: feature width mismatch");
  if (first < L) throw ArgumentError("predict_recursive: need " + std::to_string(L) + " months of history");
  if (first + horizon > features.rows() + 1 && horizon > 0 && F > 1)
    throw ArgumentError("predict_recursive: covariates do not cover the horizon");
  Matrix work = features;
  if (work.rows() < first + horizon) {
    Matrix grown(first + horizon, F);
    std::copy(work.data().begin(), work.data().end(), grown.data().begin());
    work = std::move(grown);
  }
  Vector out(horizon);
  for (std::size_t k = 0; k < horizon; ++k) {
    const std::size_t target = first + k;
    Matrix window(L, F);
    for (std::size_t t = 0; t < L; ++t) {
      auto src = work.row(target - L + t);
      std::copy(src.begin(), src.end(), window.row(t).begin());
    }
    out[k] = predict_window(m, window);
    work(target, F - 1) = out[k];
  }
  return out;
}

}  // namespace malcast
