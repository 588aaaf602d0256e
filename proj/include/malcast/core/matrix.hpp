#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "malcast/error.hpp"

namespace malcast {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. Sized for the desk-scale problems in
/// this toolkit (hidden sizes in the tens, a few hundred samples).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ == 0 ? 0 : init.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) throw ShapeError("ragged initializer for Matrix");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Vector column(std::size_t c) const {
    Vector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  std::string shape_string() const {
    return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
  }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: cannot multiply " + a.shape_string() + " by " + b.shape_string());
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

/// out += m * x
inline void gemv_add(const Matrix& m, std::span<const double> x, std::span<double> out) {
  if (m.cols() != x.size() || m.rows() != out.size())
    throw ShapeError("gemv: matrix " + m.shape_string() + " vs vector sizes " +
                     std::to_string(x.size()) + "/" + std::to_string(out.size()));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) acc += r[j] * x[j];
    out[i] += acc;
  }
}

/// out += m^T * x
inline void gemv_t_add(const Matrix& m, std::span<const double> x, std::span<double> out) {
  if (m.rows() != x.size() || m.cols() != out.size())
    throw ShapeError("gemv_t: matrix " + m.shape_string() + " vs vector sizes " +
                     std::to_string(x.size()) + "/" + std::to_string(out.size()));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) out[j] += r[j] * xi;
  }
}

/// m += a * b^T
inline void outer_add(std::span<const double> a, std::span<const double> b, Matrix& m) {
  if (m.rows() != a.size() || m.cols() != b.size())
    throw ShapeError("outer: matrix " + m.shape_string() + " vs vector sizes " +
                     std::to_string(a.size()) + "/" + std::to_string(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ai = a[i];
    if (ai == 0.0) continue;
    auto r = m.row(i);
    for (std::size_t j = 0; j < b.size(); ++j) r[j] += ai * b[j];
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw ShapeError("dot: sizes " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace malcast
