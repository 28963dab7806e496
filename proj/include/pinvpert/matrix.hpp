#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pinvpert/errors.hpp"

namespace pinvpert {

using Complex = std::complex<double>;
using Vector = std::vector<Complex>;

/// Dense complex matrix, row-major, representing a bounded operator between
/// finite-dimensional Hilbert spaces. Entries are finite by construction.
class Matrix {
public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  Matrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("Matrix: " + std::to_string(data_.size()) + " entries for a " +
                           std::to_string(rows_) + "x" + std::to_string(cols_) + " shape");
    }
    require_finite();
  }

  /// Nested-list construction, e.g. `Matrix{{1, 2}, {3, 4}}`.
  Matrix(std::initializer_list<std::initializer_list<Complex>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) {
        throw DimensionError("Matrix: ragged initializer list");
      }
      data_.insert(data_.end(), row.begin(), row.end());
    }
    require_finite();
  }

  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  static Matrix diagonal(std::initializer_list<double> d) {
    return diagonal(std::span<const double>(d.begin(), d.size()));
  }

  static Matrix column(const Vector& v) { return Matrix(v.size(), 1, v); }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  Complex& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<const Complex> entries() const noexcept { return data_; }

  Vector col(std::size_t j) const {
    Vector v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
  }

  void set_col(std::size_t j, const Vector& v) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
  }

  /// Columns [first, first + count).
  Matrix cols_range(std::size_t first, std::size_t count) const {
    Matrix out(rows_, count);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < count; ++j) out(i, j) = (*this)(i, first + j);
    return out;
  }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(),
                       [](const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
  }

  bool is_real() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](const Complex& z) { return z.imag() == 0.0; });
  }

  Matrix& operator+=(const Matrix& o) {
    require_same_shape(o, "operator+");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }

  Matrix& operator-=(const Matrix& o) {
    require_same_shape(o, "operator-");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }

  Matrix& operator*=(Complex s) noexcept {
    for (auto& z : data_) z *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Complex s, Matrix a) { return a *= s; }
  friend Matrix operator*(Matrix a, Complex s) { return a *= s; }
  friend Matrix operator-(Matrix a) { return a *= -1.0; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  void require_finite() const {
    if (!all_finite()) throw std::invalid_argument("Matrix: non-finite entry");
  }

  void require_same_shape(const Matrix& o, const char* op) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
      throw DimensionError(std::string(op) + ": shape mismatch " + std::to_string(rows_) + "x" +
                           std::to_string(cols_) + " vs " + std::to_string(o.rows_) + "x" +
                           std::to_string(o.cols_));
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

inline std::ostream& operator<<(std::ostream& os, const Matrix& m) {
  os << "[";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << (i ? "; " : "");
    for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << m(i, j);
  }
  return os << "]";
}

namespace detail {

// Complex product without the infinity recovery of operator*; entries are
// always finite here, and the library call it avoids dominates inner loops.
inline Complex mul(Complex a, Complex b) noexcept {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

// conj(a) · b.
inline Complex cmul(Complex a, Complex b) noexcept {
  return {a.real() * b.real() + a.imag() * b.imag(), a.real() * b.imag() - a.imag() * b.real()};
}

}  // namespace detail

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("multiply: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " times " +
                         std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += detail::mul(aik, b(k, j));
    }
  }
  return c;
}

inline Matrix operator*(const Matrix& a, const Matrix& b) { return multiply(a, b); }

inline Vector matvec(const Matrix& a, const Vector& x) {
  if (a.cols() != x.size()) throw DimensionError("matvec: vector length does not match columns");
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) y[i] += detail::mul(a(i, j), x[j]);
  return y;
}

/// Conjugate transpose.
inline Matrix adjoint(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = std::conj(a(i, j));
  return t;
}

inline double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (const auto& z : a.entries()) s += std::norm(z);
  return std::sqrt(s);
}

inline double max_abs_entry(const Matrix& a) {
  double m = 0.0;
  for (const auto& z : a.entries()) m = std::max(m, std::abs(z));
  return m;
}

inline Complex dot(const Vector& x, const Vector& y) {
  Complex s{};
  for (std::size_t i = 0; i < x.size(); ++i) s += detail::cmul(x[i], y[i]);
  return s;
}

inline double norm2(const Vector& x) {
  double s = 0.0;
  for (const auto& z : x) s += std::norm(z);
  return std::sqrt(s);
}

/// Numerical tolerances shared by every check in the library.
struct Tolerances {
  /// Singular value σ counts as nonzero iff σ > rank_rel · max(rows, cols) · σ_max.
  double rank_rel = 1e-13;
  double eq_abs = 1e-10;
  double eq_rel = 1e-10;
  /// A strict inequality x < c is accepted only when x < c · (1 − margin_strict).
  double margin_strict = 1e-8;

  void validate() const {
    if (!(rank_rel > 0 && eq_abs > 0 && eq_rel > 0 && margin_strict > 0)) {
      throw std::invalid_argument("Tolerances: all tolerances must be strictly positive");
    }
    if (!(rank_rel < 1 && margin_strict < 1)) {
      throw std::invalid_argument("Tolerances: rank_rel and margin_strict must be below 1");
    }
  }

  /// Slack allowed for a residual of an identity whose terms have size `scale`.
  double slack(double scale) const noexcept { return eq_abs + eq_rel * scale; }

  bool small(double residual, double scale) const noexcept { return residual <= slack(scale); }

  bool strictly_below(double value, double bound) const noexcept {
    return value < bound * (1.0 - margin_strict);
  }

  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

}  // namespace pinvpert
