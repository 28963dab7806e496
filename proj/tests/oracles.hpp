#pragma once

// Reference computations used only by the tests. None of them touch the
// library's SVD, so agreement with it is evidence rather than tautology.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "pinvpert/matrix.hpp"
#include "pinvpert/random.hpp"

namespace oracle {

using pinvpert::Complex;
using pinvpert::Matrix;
using pinvpert::Vector;

/// Thin QR with column pivoting by twice-iterated modified Gram-Schmidt.
/// Returns Q (m×r, orthonormal) and R (r×n, original column order) with A = QR.
struct PivotedQr {
  Matrix q;
  Matrix r;
};

inline PivotedQr pivoted_qr(const Matrix& a, double rel_tol = 1e-12) {
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<Vector> cols(n);
  for (std::size_t j = 0; j < n; ++j) cols[j] = a.col(j);
  std::vector<bool> used(n, false);
  std::vector<Vector> qs;
  std::vector<std::vector<Complex>> rrows;

  double first = -1.0;
  for (std::size_t step = 0; step < std::min(m, n); ++step) {
    std::size_t best = n;
    double best_norm = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double nj = pinvpert::norm2(cols[j]);
      if (nj > best_norm) best_norm = nj, best = j;
    }
    if (first < 0) first = best_norm;
    if (best == n || best_norm <= rel_tol * std::max(first, 1e-300) * std::max(m, n)) break;

    Vector q = cols[best];
    for (auto& z : q) z /= best_norm;
    // Second pass against earlier q's for orthogonality.
    for (const Vector& p : qs) {
      const Complex c = pinvpert::dot(p, q);
      for (std::size_t i = 0; i < m; ++i) q[i] -= c * p[i];
    }
    const double len = pinvpert::norm2(q);
    for (auto& z : q) z /= len;

    std::vector<Complex> rrow(n);
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j] && j != best) continue;
      const Complex c = pinvpert::dot(q, cols[j]);
      rrow[j] = c;
      for (std::size_t i = 0; i < m; ++i) cols[j][i] -= c * q[i];
    }
    used[best] = true;
    qs.push_back(std::move(q));
    rrows.push_back(std::move(rrow));
  }

  PivotedQr out{Matrix(m, qs.size()), Matrix(qs.size(), n)};
  for (std::size_t k = 0; k < qs.size(); ++k) {
    out.q.set_col(k, qs[k]);
    for (std::size_t j = 0; j < n; ++j) out.r(k, j) = rrows[k][j];
  }
  return out;
}

/// A† from A = QR: R has full row rank, so R* = Q₂R₂ and A† = Q₂ (R₂*)⁻¹ Q*.
inline Matrix qr_pinv(const Matrix& a, double rel_tol = 1e-12) {
  const PivotedQr f = pivoted_qr(a, rel_tol);
  const std::size_t r = f.q.cols();
  if (r == 0) return Matrix(a.cols(), a.rows());
  const PivotedQr g = pivoted_qr(pinvpert::adjoint(f.r), 0.0);

  // Solve (R₂ P)* M = Q* where g.r = R₂ P is a column permutation of an upper
  // triangular matrix; plain Gaussian elimination on the small r×r system.
  Matrix lhs = pinvpert::adjoint(g.r);
  Matrix rhs = pinvpert::adjoint(f.q);
  for (std::size_t k = 0; k < r; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < r; ++i)
      if (std::abs(lhs(i, k)) > std::abs(lhs(piv, k))) piv = i;
    for (std::size_t j = 0; j < r; ++j) std::swap(lhs(k, j), lhs(piv, j));
    for (std::size_t j = 0; j < rhs.cols(); ++j) std::swap(rhs(k, j), rhs(piv, j));
    for (std::size_t i = 0; i < r; ++i) {
      if (i == k) continue;
      const Complex f2 = lhs(i, k) / lhs(k, k);
      if (f2 == Complex{}) continue;
      for (std::size_t j = k; j < r; ++j) lhs(i, j) -= f2 * lhs(k, j);
      for (std::size_t j = 0; j < rhs.cols(); ++j) rhs(i, j) -= f2 * rhs(k, j);
    }
  }
  for (std::size_t k = 0; k < r; ++k)
    for (std::size_t j = 0; j < rhs.cols(); ++j) rhs(k, j) /= lhs(k, k);
  return g.q * rhs;
}

inline std::size_t qr_rank(const Matrix& a, double rel_tol = 1e-12) { return pivoted_qr(a, rel_tol).q.cols(); }

/// Largest singular value by power iteration on A*A.
inline double power_norm(const Matrix& a, std::size_t iterations = 2000) {
  if (a.empty()) return 0.0;
  const Matrix gram = pinvpert::adjoint(a) * a;
  Vector x(a.cols());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = Complex(1.0 + 0.1 * static_cast<double>(i), 0.05 * static_cast<double>(i));
  double lambda = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    Vector y = pinvpert::matvec(gram, x);
    const double len = pinvpert::norm2(y);
    if (len == 0.0) return 0.0;
    for (auto& z : y) z /= len;
    lambda = len / pinvpert::norm2(x);
    x = std::move(y);
  }
  return std::sqrt(lambda);
}

/// Singular values of a 2×2 matrix from the closed-form eigenvalues of A*A.
inline std::pair<double, double> singular_values_2x2(const Matrix& a) {
  const Matrix g = pinvpert::adjoint(a) * a;
  const double p = g(0, 0).real(), q = g(1, 1).real();
  const double off = std::norm(g(0, 1));
  const double mid = 0.5 * (p + q);
  const double rad = std::sqrt(0.25 * (p - q) * (p - q) + off);
  return {std::sqrt(mid + rad), std::sqrt(std::max(0.0, mid - rad))};
}

/// sup ‖Sx‖/‖Tx‖ estimated on random unit x with Tx ≠ 0.
inline double sampled_ratio_sup(const Matrix& t, const Matrix& s, std::size_t samples, std::uint64_t seed) {
  pinvpert::Rng rng(seed);
  double best = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const Vector x = pinvpert::random_unit_vector(t.cols(), rng);
    const double tx = pinvpert::norm2(pinvpert::matvec(t, x));
    if (tx < 1e-12) continue;
    best = std::max(best, pinvpert::norm2(pinvpert::matvec(s, x)) / tx);
  }
  return best;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return pinvpert::max_abs_entry(a - b); }

}  // namespace oracle
