#pragma once

#include <cmath>
#include <cstddef>

#include "malcast/error.hpp"
#include "malcast/lstm/params.hpp"

namespace malcast {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 5.0;  // <= 0 disables clipping
};

/// First and second moment estimates, shaped like the parameters.
struct AdamMoments {
  LstmParams m;
  LstmParams v;

  static AdamMoments zeros_like(const LstmParams& p) {
    return {LstmParams::zeros(p.features, p.hidden), LstmParams::zeros(p.features, p.hidden)};
  }
};

inline double gradient_norm(const LstmParams& g) {
  double acc = 0.0;
  for (auto t : g.tensors())
    for (double v : t) acc += v * v;
  return std::sqrt(acc);
}

/// Bias-corrected Adam update at step `t` (1-based). The gradient is
/// rescaled to `clip_norm` first when its global L2 norm exceeds it.
inline void adam_step(LstmParams& params, const LstmParams& gradients, AdamMoments& moments, std::size_t t,
                      const AdamConfig& cfg) {
  if (t < 1) throw ArgumentError("adam_step: step count must be >= 1");
  params.require_shape(gradients, "adam_step");
  params.require_shape(moments.m, "adam_step");
  params.require_shape(moments.v, "adam_step");

  double scale = 1.0;
  if (cfg.clip_norm > 0.0) {
    const double norm = gradient_norm(gradients);
    if (norm > cfg.clip_norm) scale = cfg.clip_norm / norm;
  }
  const double td = static_cast<double>(t);
  const double bc1 = 1.0 - std::pow(cfg.beta1, td);
  const double bc2 = 1.0 - std::pow(cfg.beta2, td);

  auto pt = params.tensors();
  const auto gt = gradients.tensors();
  auto mt = moments.m.tensors();
  auto vt = moments.v.tensors();
  for (std::size_t k = 0; k < pt.size(); ++k) {
    for (std::size_t i = 0; i < pt[k].size(); ++i) {
      const double g = gt[k][i] * scale;
      double& m = mt[k][i];
      double& v = vt[k][i];
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m / bc1;
      const double v_hat = v / bc2;
      pt[k][i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

}  // namespace malcast
