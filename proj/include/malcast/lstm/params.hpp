#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "malcast/core/matrix.hpp"
#include "malcast/core/rng.hpp"
#include "malcast/error.hpp"

namespace malcast {

/// Gate blocks inside the fused weight matrices, in storage order.
enum class Gate : std::size_t { Input = 0, Forget = 1, Cell = 2, Output = 3 };

/// Single-layer LSTM with a linear read-out of the final hidden state.
///
/// The four gates are stored fused: `w` is (4*hidden x features), `u` is
/// (4*hidden x hidden) and `b` has 4*hidden entries, with gate k occupying
/// rows [k*hidden, (k+1)*hidden) in the order input, forget, cell
/// candidate, output.
struct LstmParams {
  std::size_t features = 0;
  std::size_t hidden = 0;
  Matrix w;
  Matrix u;
  Vector b;
  Vector head_w;
  double head_b = 0.0;

  static LstmParams zeros(std::size_t features, std::size_t hidden) {
    if (features == 0 || hidden == 0) throw ShapeError("LstmParams: features and hidden must be >= 1");
    LstmParams p;
    p.features = features;
    p.hidden = hidden;
    p.w = Matrix(4 * hidden, features);
    p.u = Matrix(4 * hidden, hidden);
    p.b.assign(4 * hidden, 0.0);
    p.head_w.assign(hidden, 0.0);
    return p;
  }

  /// Uniform in [-k, k], k = 1/sqrt(hidden), forget-gate bias set to +1.
  static LstmParams random(std::size_t features, std::size_t hidden, Rng& rng) {
    LstmParams p = zeros(features, hidden);
    const double k = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (auto t : p.tensors())
      for (double& v : t) v = rng.uniform(-k, k);
    for (double& v : p.gate_bias(Gate::Forget)) v = 1.0;
    return p;
  }

  std::span<double> gate_bias(Gate g) { return {b.data() + static_cast<std::size_t>(g) * hidden, hidden}; }
  std::span<const double> gate_bias(Gate g) const {
    return {b.data() + static_cast<std::size_t>(g) * hidden, hidden};
  }
  std::span<double> gate_w_row(Gate g, std::size_t unit) { return w.row(static_cast<std::size_t>(g) * hidden + unit); }
  std::span<double> gate_u_row(Gate g, std::size_t unit) { return u.row(static_cast<std::size_t>(g) * hidden + unit); }

  /// Every parameter tensor as a flat view, in a fixed order
  /// (w, u, b, head_w, head_b).
  std::array<std::span<double>, 5> tensors() {
    return {w.data(), u.data(), std::span<double>(b), std::span<double>(head_w), std::span<double>(&head_b, 1)};
  }
  std::array<std::span<const double>, 5> tensors() const {
    return {w.data(), u.data(), std::span<const double>(b), std::span<const double>(head_w),
            std::span<const double>(&head_b, 1)};
  }
  static constexpr std::array<const char*, 5> kTensorNames = {"w", "u", "b", "head_w", "head_b"};

  std::size_t parameter_count() const noexcept { return 4 * hidden * (features + hidden + 1) + hidden + 1; }

  bool same_shape(const LstmParams& o) const noexcept { return features == o.features && hidden == o.hidden; }

  void require_shape(const LstmParams& o, const char* what) const {
    if (!same_shape(o))
      throw ShapeError(std::string(what) + ": parameter shapes (features " + std::to_string(features) + ", hidden " +
                       std::to_string(hidden) + ") vs (features " + std::to_string(o.features) + ", hidden " +
                       std::to_string(o.hidden) + ")");
  }

  bool all_finite() const {
    for (auto t : tensors())
      for (double v : t)
        if (!std::isfinite(v)) return false;
    return true;
  }

  /// Hash of the raw parameter bits; two parameter sets with equal
  /// fingerprints are treated as the same network.
  std::uint64_t fingerprint() const noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL ^ (features * 31 + hidden);
    for (auto t : tensors())
      for (double v : t) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        h = (h ^ bits) * 0x100000001B3ULL;
        h ^= h >> 29;
      }
    return h;
  }

  void set_zero() {
    for (auto t : tensors())
      for (double& v : t) v = 0.0;
  }

  friend bool operator==(const LstmParams&, const LstmParams&) = default;
};

struct LstmState {
  Vector h;
  Vector c;

  static LstmState zeros(std::size_t hidden) { return {Vector(hidden, 0.0), Vector(hidden, 0.0)}; }
  friend bool operator==(const LstmState&, const LstmState&) = default;
};

}  // namespace malcast
