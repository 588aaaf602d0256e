#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "malcast/core/matrix.hpp"
#include "malcast/error.hpp"

namespace malcast {

/// Per-feature min-max scaling to [0, 1]. A constant feature (max == min)
/// maps to 0 and inverts back to its constant value.
struct MinMaxScaler {
  Vector min;
  Vector max;

  std::size_t width() const noexcept { return min.size(); }
  bool fitted() const noexcept { return !min.empty(); }

  /// Fits on the rows of `values` (rows = observations, cols = features).
  static MinMaxScaler fit(const Matrix& values) {
    if (values.rows() == 0 || values.cols() == 0)
      throw ArgumentError("scaler_fit: need at least one row and one feature");
    MinMaxScaler s;
    s.min.assign(values.row(0).begin(), values.row(0).end());
    s.max = s.min;
    for (std::size_t r = 1; r < values.rows(); ++r) {
      const auto row = values.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        s.min[c] = std::min(s.min[c], row[c]);
        s.max[c] = std::max(s.max[c], row[c]);
      }
    }
    return s;
  }

  static MinMaxScaler fit(std::span<const double> single_feature) {
    Matrix m(single_feature.size(), 1);
    std::copy(single_feature.begin(), single_feature.end(), m.data().begin());
    return fit(m);
  }

  double transform(std::size_t feature, double v) const {
    const double range = max[feature] - min[feature];
    return range > 0.0 ? (v - min[feature]) / range : 0.0;
  }

  double inverse(std::size_t feature, double v) const {
    const double range = max[feature] - min[feature];
    return range > 0.0 ? v * range + min[feature] : min[feature];
  }

  Vector transform(std::span<const double> v) const {
    check_width(v.size(), "scaler_transform");
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = transform(i, v[i]);
    return out;
  }

  Vector inverse(std::span<const double> v) const {
    check_width(v.size(), "scaler_inverse");
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = inverse(i, v[i]);
    return out;
  }

  /// Row-wise transform of an observations x features matrix.
  Matrix transform(const Matrix& m) const {
    check_width(m.cols(), "scaler_transform");
    Matrix out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = transform(c, m(r, c));
    return out;
  }

  friend bool operator==(const MinMaxScaler&, const MinMaxScaler&) = default;

 private:
  void check_width(std::size_t n, const char* what) const {
    if (!fitted()) throw ShapeError(std::string(what) + ": scaler is not fitted");
    if (n != width())
      throw ShapeError(std::string(what) + ": vector width " + std::to_string(n) + " != scaler width " +
                       std::to_string(width()));
  }
};

}  // namespace malcast
