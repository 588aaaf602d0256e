#pragma once

#include <cmath>
#include <span>

namespace malcast {

// Both branches only ever exponentiate a non-positive number, so large |x|
// saturates instead of overflowing.
inline double sigmoid(double x) noexcept {
  if (x >= 0.0) {
    const double z = std::exp(-x);
    return 1.0 / (1.0 + z);
  }
  const double z = std::exp(x);
  return z / (1.0 + z);
}

inline double tanh(double x) noexcept { return std::tanh(x); }

inline void sigmoid_inplace(std::span<double> v) noexcept {
  for (double& x : v) x = sigmoid(x);
}

inline void tanh_inplace(std::span<double> v) noexcept {
  for (double& x : v) x = std::tanh(x);
}

}  // namespace malcast
