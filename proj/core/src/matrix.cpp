#include "gridcast/matrix.hpp"

#include <cmath>

namespace gridcast {

namespace {

void require_positive_dims(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw ShapeError("matrix dimensions must be positive, got " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {
  require_positive_dims(rows, cols);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  require_positive_dims(rows, cols);
  if (values_.size() != rows * cols) {
    throw ShapeError("value count " + std::to_string(values_.size()) + " does not fill a " +
                     shape() + " matrix");
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows.begin() == rows.end() ? 0 : rows.begin()->size();
  require_positive_dims(rows_, cols_);
  values_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw ShapeError("ragged initializer: expected " + std::to_string(cols_) +
                       " columns, got " + std::to_string(r.size()));
    }
    values_.insert(values_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::filled(std::size_t rows, std::size_t cols, double value) {
  Matrix m(rows, cols);
  for (double& v : m.values_) v = value;
  return m;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

Matrix Matrix::row(std::vector<double> values) {
  const std::size_t n = values.size();
  return Matrix(1, n, std::move(values));
}

std::string Matrix::shape() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

bool Matrix::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      t.at(c, r) = at(r, c);
    }
  }
  return t;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (!same_shape(other)) {
    throw ShapeError("elementwise add of " + shape() + " and " + other.shape());
  }
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  if (!same_shape(other)) {
    throw ShapeError("elementwise subtract of " + shape() + " and " + other.shape());
  }
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Matrix& Matrix::operator*=(double scalar) {
  for (double& v : values_) v *= scalar;
  return *this;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul of " + a.shape() + " by " + b.shape() +
                     ": inner dimensions differ");
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        out.at(i, j) += aik * b.at(k, j);
      }
    }
  }
  return out;
}

Matrix matmul_bt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_bt of " + a.shape() + " by " + b.shape() +
                     "^T: inner dimensions differ");
  }
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        acc += a.at(i, k) * b.at(j, k);
      }
      out.at(i, j) = acc;
    }
  }
  return out;
}

void add_outer(Matrix& target, const Matrix& a, const Matrix& b) {
  if (a.rows() != 1 || b.rows() != 1) {
    throw ShapeError("add_outer expects row vectors, got " + a.shape() + " and " + b.shape());
  }
  if (target.rows() != a.cols() || target.cols() != b.cols()) {
    throw ShapeError("add_outer target " + target.shape() + " does not match " +
                     std::to_string(a.cols()) + "x" + std::to_string(b.cols()));
  }
  for (std::size_t i = 0; i < a.cols(); ++i) {
    const double ai = a.at(0, i);
    if (ai == 0.0) continue;
    for (std::size_t j = 0; j < b.cols(); ++j) {
      target.at(i, j) += ai * b.at(0, j);
    }
  }
}

namespace scalar {

double sigmoid(double x) {
  // Split on sign so the exponential never overflows.
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace scalar

Matrix map_sigmoid(const Matrix& m) {
  // Saturation is clamped just inside (0, 1) so the range contract holds
  // for every finite input.
  static const double kHi = std::nextafter(1.0, 0.0);
  static const double kLo = std::nextafter(0.0, 1.0);
  Matrix out = m;
  for (double& v : out.values()) {
    v = scalar::sigmoid(v);
    if (v >= 1.0) v = kHi;
    if (v <= 0.0) v = kLo;
  }
  return out;
}

Matrix map_tanh(const Matrix& m) {
  static const double kHi = std::nextafter(1.0, 0.0);
  static const double kLo = std::nextafter(-1.0, 0.0);
  Matrix out = m;
  for (double& v : out.values()) {
    v = std::tanh(v);
    if (v >= 1.0) v = kHi;
    if (v <= -1.0) v = kLo;
  }
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("hadamard of " + a.shape() + " and " + b.shape());
  }
  Matrix out = a;
  auto vs = out.values();
  auto bs = b.values();
  for (std::size_t i = 0; i < vs.size(); ++i) vs[i] *= bs[i];
  return out;
}

double global_l2_norm(std::span<const Matrix* const> tensors) {
  double sum_sq = 0.0;
  for (const Matrix* m : tensors) {
    for (double v : m->values()) sum_sq += v * v;
  }
  return std::sqrt(sum_sq);
}

double global_l2_norm(const std::vector<Matrix>& tensors) {
  double sum_sq = 0.0;
  for (const Matrix& m : tensors) {
    for (double v : m.values()) sum_sq += v * v;
  }
  return std::sqrt(sum_sq);
}

Matrix uniform_init(std::size_t rows, std::size_t cols, double range, SeededRng& rng) {
  if (!(range > 0.0)) {
    throw ConfigError("uniform_init range must be positive, got " + std::to_string(range));
  }
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-range, range);
  return m;
}

}  // namespace gridcast
