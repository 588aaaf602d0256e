#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "malcast/lstm/network.hpp"

namespace malcast {

struct GradientCheckResult {
  /// Largest relative error per tensor, in `LstmParams::kTensorNames` order.
  std::array<double, 5> max_relative_error{};
  std::size_t parameters_checked = 0;

  double worst() const { return *std::max_element(max_relative_error.begin(), max_relative_error.end()); }
};

/// Compares backward() against central differences of the batch MSE, for
/// every parameter. Relative error is |a - n| / max(|a|, |n|, floor); the
/// floor keeps gradients that are zero up to rounding from dominating.
inline GradientCheckResult gradient_check(const LstmParams& params, const std::vector<Matrix>& inputs,
                                          std::span<const double> targets, double eps = 1e-5, double floor = 1e-7) {
  if (inputs.empty() || inputs.size() != targets.size())
    throw ArgumentError("gradient_check: need matching, non-empty inputs and targets");
  std::vector<std::size_t> all(inputs.size());
  std::iota(all.begin(), all.end(), std::size_t{0});

  ForwardCache cache;
  auto analytic = LstmParams::zeros(params.features, params.hidden);
  batch_loss_and_gradient(params, inputs, targets, all, analytic, cache);

  GradientCheckResult result;
  LstmParams probe = params;
  const auto a = analytic.tensors();
  auto p = probe.tensors();
  for (std::size_t k = 0; k < p.size(); ++k) {
    for (std::size_t i = 0; i < p[k].size(); ++i) {
      const double saved = p[k][i];
      p[k][i] = saved + eps;
      const double up = dataset_loss(probe, inputs, targets);
      p[k][i] = saved - eps;
      const double down = dataset_loss(probe, inputs, targets);
      p[k][i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double scale = std::max({std::abs(a[k][i]), std::abs(numeric), floor});
      result.max_relative_error[k] = std::max(result.max_relative_error[k], std::abs(a[k][i] - numeric) / scale);
      ++result.parameters_checked;
    }
  }
  return result;
}

}  // namespace malcast
