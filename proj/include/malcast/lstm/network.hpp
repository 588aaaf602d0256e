#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "malcast/core/activations.hpp"
#include "malcast/core/matrix.hpp"
#include "malcast/error.hpp"
#include "malcast/lstm/params.hpp"

namespace malcast {

namespace detail {

/// z (4H) -> gate activations in place: sigmoid on i, f, o; tanh on the candidate.
inline void activate_gates(std::span<double> z, std::size_t hidden) {
  sigmoid_inplace(z.subspan(0, 2 * hidden));
  tanh_inplace(z.subspan(2 * hidden, hidden));
  sigmoid_inplace(z.subspan(3 * hidden, hidden));
}

}  // namespace detail

/// One LSTM step:
///   i = sig(W_i x + U_i h + b_i)   f = sig(...)   o = sig(...)
///   g = tanh(W_g x + U_g h + b_g)
///   c' = f*c + i*g                 h' = o*tanh(c')
inline LstmState cell_step(const LstmParams& p, std::span<const double> x, const LstmState& s) {
  if (x.size() != p.features)
    throw ShapeError("cell_step: input width " + std::to_string(x.size()) + " != features " +
                     std::to_string(p.features));
  if (s.h.size() != p.hidden || s.c.size() != p.hidden)
    throw ShapeError("cell_step: state size does not match hidden " + std::to_string(p.hidden));
  const std::size_t H = p.hidden;
  Vector z(p.b);
  gemv_add(p.w, x, z);
  gemv_add(p.u, s.h, z);
  detail::activate_gates(z, H);
  LstmState next{Vector(H), Vector(H)};
  for (std::size_t j = 0; j < H; ++j) {
    next.c[j] = z[H + j] * s.c[j] + z[j] * z[2 * H + j];
    next.h[j] = z[3 * H + j] * std::tanh(next.c[j]);
  }
  return next;
}

/// Activations of a full forward pass, enough to run BPTT.
struct ForwardCache {
  std::size_t features = 0;
  std::size_t hidden = 0;
  std::size_t steps = 0;
  std::uint64_t params_fingerprint = 0;
  Vector x;       // steps x features
  Vector h;       // (steps + 1) x hidden; row 0 is the zero initial state
  Vector c;       // (steps + 1) x hidden
  Vector gates;   // steps x 4*hidden, post-activation (i, f, g, o)
  Vector tanh_c;  // steps x hidden
  double prediction = 0.0;

  std::span<const double> h_at(std::size_t t) const { return {h.data() + t * hidden, hidden}; }
  std::span<const double> c_at(std::size_t t) const { return {c.data() + t * hidden, hidden}; }
};

/// Runs the window (rows = time steps) from a zero state and applies the
/// linear head to the final hidden state.
inline void forward(const LstmParams& p, const Matrix& window, ForwardCache& cache) {
  if (window.rows() < 1) throw ShapeError("forward: window must have at least one step");
  if (window.cols() != p.features)
    throw ShapeError("forward: window " + window.shape_string() + " vs network features " +
                     std::to_string(p.features));
  const std::size_t H = p.hidden, F = p.features, L = window.rows();
  cache.features = F;
  cache.hidden = H;
  cache.steps = L;
  cache.params_fingerprint = p.fingerprint();
  cache.x.assign(window.data().begin(), window.data().end());
  cache.h.assign((L + 1) * H, 0.0);
  cache.c.assign((L + 1) * H, 0.0);
  cache.gates.resize(L * 4 * H);
  cache.tanh_c.resize(L * H);
  for (std::size_t t = 0; t < L; ++t) {
    std::span<double> z(cache.gates.data() + t * 4 * H, 4 * H);
    std::copy(p.b.begin(), p.b.end(), z.begin());
    gemv_add(p.w, window.row(t), z);
    gemv_add(p.u, cache.h_at(t), z);
    detail::activate_gates(z, H);
    const double* c_prev = cache.c.data() + t * H;
    double* c_next = cache.c.data() + (t + 1) * H;
    double* h_next = cache.h.data() + (t + 1) * H;
    double* tc = cache.tanh_c.data() + t * H;
    for (std::size_t j = 0; j < H; ++j) {
      c_next[j] = z[H + j] * c_prev[j] + z[j] * z[2 * H + j];
      tc[j] = std::tanh(c_next[j]);
      h_next[j] = z[3 * H + j] * tc[j];
    }
  }
  cache.prediction = dot(p.head_w, cache.h_at(L)) + p.head_b;
}

inline double forward(const LstmParams& p, const Matrix& window) {
  ForwardCache cache;
  forward(p, window, cache);
  return cache.prediction;
}

inline double loss_mse(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size())
    throw ArgumentError("loss_mse: " + std::to_string(predictions.size()) + " predictions vs " +
                        std::to_string(targets.size()) + " targets");
  if (predictions.empty()) throw ArgumentError("loss_mse: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - targets[i];
    acc += d * d;
  }
  return acc / static_cast<double>(predictions.size());
}

/// Backpropagation through time. Adds d(loss)/d(params) to `grads`, where
/// `d_prediction` is d(loss)/d(prediction) for the cached forward pass.
inline void backward(const LstmParams& p, const ForwardCache& cache, double d_prediction, LstmParams& grads) {
  if (cache.features != p.features || cache.hidden != p.hidden || cache.steps == 0)
    throw ContractError("backward: cache does not match the network shape");
  if (cache.params_fingerprint != p.fingerprint())
    throw ContractError("backward: cache was produced by different parameters");
  p.require_shape(grads, "backward");
  const std::size_t H = p.hidden, F = p.features, L = cache.steps;

  const auto h_last = cache.h_at(L);
  for (std::size_t j = 0; j < H; ++j) grads.head_w[j] += d_prediction * h_last[j];
  grads.head_b += d_prediction;

  Vector dh(H), dc(H, 0.0), dz(4 * H), dh_prev(H);
  for (std::size_t j = 0; j < H; ++j) dh[j] = d_prediction * p.head_w[j];

  for (std::size_t t = L; t-- > 0;) {
    const double* a = cache.gates.data() + t * 4 * H;
    const double* tc = cache.tanh_c.data() + t * H;
    const auto c_prev = cache.c_at(t);
    for (std::size_t j = 0; j < H; ++j) {
      const double i = a[j], f = a[H + j], g = a[2 * H + j], o = a[3 * H + j];
      const double d_o = dh[j] * tc[j];
      dc[j] += dh[j] * o * (1.0 - tc[j] * tc[j]);
      dz[j] = dc[j] * g * i * (1.0 - i);
      dz[H + j] = dc[j] * c_prev[j] * f * (1.0 - f);
      dz[2 * H + j] = dc[j] * i * (1.0 - g * g);
      dz[3 * H + j] = d_o * o * (1.0 - o);
      dc[j] *= f;
    }
    outer_add(dz, std::span<const double>(cache.x.data() + t * F, F), grads.w);
    outer_add(dz, cache.h_at(t), grads.u);
    for (std::size_t k = 0; k < 4 * H; ++k) grads.b[k] += dz[k];
    std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    gemv_t_add(p.u, dz, dh_prev);
    dh.swap(dh_prev);
  }
}

inline LstmParams backward(const LstmParams& p, const ForwardCache& cache, double d_prediction) {
  LstmParams grads = LstmParams::zeros(p.features, p.hidden);
  backward(p, cache, d_prediction, grads);
  return grads;
}

/// MSE over the listed samples and its gradient (written to `grads`).
inline double batch_loss_and_gradient(const LstmParams& p, const std::vector<Matrix>& inputs,
                                      std::span<const double> targets, std::span<const std::size_t> batch,
                                      LstmParams& grads, ForwardCache& cache) {
  if (batch.empty()) throw ArgumentError("batch_loss_and_gradient: empty batch");
  grads.set_zero();
  const double n = static_cast<double>(batch.size());
  double loss = 0.0;
  for (auto idx : batch) {
    forward(p, inputs[idx], cache);
    const double err = cache.prediction - targets[idx];
    loss += err * err;
    backward(p, cache, 2.0 * err / n, grads);
  }
  return loss / n;
}

inline double dataset_loss(const LstmParams& p, const std::vector<Matrix>& inputs, std::span<const double> targets) {
  Vector preds(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) preds[i] = forward(p, inputs[i]);
  return loss_mse(preds, targets);
}

}  // namespace malcast
