#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

#include "gridcast/errors.hpp"

namespace gridcast {

// Dense row-major matrix of doubles. The only numeric container in the
// library: parameters, activations and gradients are all Matrix values.
// Row-vector convention: sequence inputs and cell states are 1 x d rows.
class Matrix {
 public:
  // Null matrix (0 x 0). Only valid as an assignment target.
  Matrix() = default;

  // Zero-filled rows x cols matrix. Dimensions must be positive.
  Matrix(std::size_t rows, std::size_t cols);

  // rows x cols matrix filled from `values`, row-major.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  // Nested-list literal, e.g. Matrix{{1.0, 2.0}, {3.0, 4.0}}.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
  static Matrix filled(std::size_t rows, std::size_t cols, double value);
  static Matrix identity(std::size_t n);
  static Matrix row(std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& at(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return at(r, c); }
  double operator()(std::size_t r, std::size_t c) const { return at(r, c); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  // "rows x cols" string, for error messages.
  std::string shape() const;
  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const;

  Matrix transpose() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double scalar);

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }
  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.values_ == b.values_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// Deterministic pseudo-random stream. The generator is std::mt19937_64,
// whose output sequence is pinned by the C++ standard, so identical seeds
// produce identical streams on every platform. Doubles are derived from
// the top 53 bits of each draw (never through std::*_distribution, whose
// output is implementation-defined).
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

 private:
  std::mt19937_64 engine_;
};

// result = a * b. Requires a.cols() == b.rows().
Matrix matmul(const Matrix& a, const Matrix& b);

// result = a * b^T. Requires a.cols() == b.cols().
Matrix matmul_bt(const Matrix& a, const Matrix& b);

// target += a^T * b for row vectors a (1 x m) and b (1 x n); target is m x n.
void add_outer(Matrix& target, const Matrix& a, const Matrix& b);

// Elementwise logistic sigmoid, output strictly inside (0, 1).
Matrix map_sigmoid(const Matrix& m);

// Elementwise tanh, output strictly inside (-1, 1).
Matrix map_tanh(const Matrix& m);

// Elementwise product. Requires identical shapes.
Matrix hadamard(const Matrix& a, const Matrix& b);

// sqrt of the sum of squares of every element across all tensors.
double global_l2_norm(std::span<const Matrix* const> tensors);
double global_l2_norm(const std::vector<Matrix>& tensors);

// rows x cols matrix of i.i.d. samples uniform in [-range, range].
// Consumes exactly rows*cols draws from `rng`.
Matrix uniform_init(std::size_t rows, std::size_t cols, double range, SeededRng& rng);

namespace scalar {
double sigmoid(double x);
}  // namespace scalar

}  // namespace gridcast
