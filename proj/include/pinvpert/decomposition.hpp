#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "pinvpert/errors.hpp"
#include "pinvpert/matrix.hpp"

namespace pinvpert {

/// Thin singular value decomposition a = u · diag(sigma) · v*.
/// u is rows×k, v is cols×k with k = min(rows, cols); sigma is non-increasing.
struct SvdFactors {
  Matrix u;
  std::vector<double> sigma;
  Matrix v;

  double sigma_max() const noexcept { return sigma.empty() ? 0.0 : sigma.front(); }

  Matrix reconstruct() const {
    Matrix us = u;
    for (std::size_t i = 0; i < us.rows(); ++i)
      for (std::size_t j = 0; j < us.cols(); ++j) us(i, j) *= sigma[j];
    return us * adjoint(v);
  }
};

struct SvdOptions {
  int max_sweeps = 80;
  bool compute_vectors = true;  ///< false leaves u and v empty
};

namespace detail {

// Gram-Schmidt `x` against the first `count` columns of `q`, twice.
inline void orthogonalize_against(Vector& x, const Matrix& q, std::size_t count) {
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < count; ++j) {
      Complex proj{};
      for (std::size_t i = 0; i < q.rows(); ++i) proj += cmul(q(i, j), x[i]);
      for (std::size_t i = 0; i < q.rows(); ++i) x[i] -= mul(proj, q(i, j));
    }
  }
}

// One-sided (Hestenes) Jacobi on a tall matrix (rows >= cols). Columns are
// held as contiguous vectors since every rotation touches two of them.
inline SvdFactors jacobi_svd_tall(const Matrix& a, const SvdOptions& opts) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  std::vector<Vector> w(n, Vector(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) w[j][i] = a(i, j);
  std::vector<Vector> v;
  if (opts.compute_vectors) {
    v.assign(n, Vector(n));
    for (std::size_t j = 0; j < n; ++j) v[j][j] = 1.0;
  }
  const double eps = std::numeric_limits<double>::epsilon();
  const double threshold = eps * static_cast<double>(std::max<std::size_t>(m, 1));

  auto rotate = [](Vector& x, Vector& y, double c, Complex s_conj_phase, Complex s_phase) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const Complex xp = x[i], yq = y[i];
      x[i] = c * xp - mul(s_conj_phase, yq);
      y[i] = mul(s_phase, xp) + c * yq;
    }
  };

  bool converged = n < 2;
  for (int sweep = 0; sweep < opts.max_sweeps && !converged; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Vector& wp = w[p];
        const Vector& wq = w[q];
        double alpha = 0.0, beta = 0.0;
        Complex g{};
        for (std::size_t i = 0; i < m; ++i) {
          alpha += std::norm(wp[i]);
          beta += std::norm(wq[i]);
          g += cmul(wp[i], wq[i]);
        }
        const double abs_g = std::abs(g);
        if (abs_g == 0.0 || abs_g <= threshold * std::sqrt(alpha * beta)) continue;
        if (alpha < std::numeric_limits<double>::min() || beta < std::numeric_limits<double>::min()) continue;
        rotated = true;

        const Complex phase = g / abs_g;
        const double zeta = (beta - alpha) / (2.0 * abs_g);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate(w[p], w[q], c, s * std::conj(phase), s * phase);
        if (opts.compute_vectors) rotate(v[p], v[q], c, s * std::conj(phase), s * phase);
      }
    }
    converged = !rotated;
  }
  if (!converged) {
    throw ConvergenceError("svd: one-sided Jacobi did not converge within " + std::to_string(opts.max_sweeps) +
                           " sweeps");
  }

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) norms[j] = norm2(w[j]);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  SvdFactors f;
  f.sigma.resize(n);
  for (std::size_t k = 0; k < n; ++k) f.sigma[k] = norms[order[k]];
  if (!opts.compute_vectors) return f;

  f.u = Matrix(m, n);
  f.v = Matrix(n, n);
  const double smax = n ? norms[order[0]] : 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    f.v.set_col(k, v[j]);

    Vector col(m);
    // Columns that collapsed to rounding level carry no direction; rebuild
    // them from the standard basis so u keeps orthonormal columns.
    const bool degenerate = norms[j] <= eps * smax || norms[j] == 0.0;
    if (!degenerate) {
      for (std::size_t i = 0; i < m; ++i) col[i] = w[j][i] / norms[j];
      orthogonalize_against(col, f.u, k);
    }
    double len = degenerate ? 0.0 : norm2(col);
    for (std::size_t e = 0; len < 0.5 && e < m; ++e) {
      std::fill(col.begin(), col.end(), Complex{});
      col[e] = 1.0;
      orthogonalize_against(col, f.u, k);
      len = norm2(col);
    }
    for (auto& z : col) z /= len;
    f.u.set_col(k, col);
  }
  return f;
}

}  // namespace detail

/// Thin SVD by one-sided Jacobi. Deterministic for identical input; throws
/// ConvergenceError rather than returning unconverged factors.
inline SvdFactors svd(const Matrix& a, const SvdOptions& opts = {}) {
  if (!a.all_finite()) throw std::invalid_argument("svd: non-finite entry");
  if (a.rows() >= a.cols()) return detail::jacobi_svd_tall(a, opts);
  SvdFactors f = detail::jacobi_svd_tall(adjoint(a), opts);
  std::swap(f.u, f.v);
  return f;
}

/// Singular values only, non-increasing.
inline std::vector<double> singular_values(const Matrix& a) {
  SvdOptions opts;
  opts.compute_vectors = false;
  return svd(a, opts).sigma;
}

inline double spectral_norm(const Matrix& a) {
  if (a.empty()) return 0.0;
  const std::vector<double> sigma = singular_values(a);
  return sigma.empty() ? 0.0 : sigma.front();
}

/// Absolute threshold below which singular values count as zero.
inline double rank_cutoff(const std::vector<double>& sigma, std::size_t rows, std::size_t cols,
                          const Tolerances& tol) {
  const double smax = sigma.empty() ? 0.0 : sigma.front();
  return tol.rank_rel * static_cast<double>(std::max(rows, cols)) * smax;
}

inline std::size_t numerical_rank(const SvdFactors& f, std::size_t rows, std::size_t cols, const Tolerances& tol) {
  const double cut = rank_cutoff(f.sigma, rows, cols, tol);
  std::size_t r = 0;
  while (r < f.sigma.size() && f.sigma[r] > cut) ++r;
  return r;
}

inline std::size_t numerical_rank(const Matrix& a, const Tolerances& tol) {
  SvdFactors f;
  f.sigma = singular_values(a);
  return numerical_rank(f, a.rows(), a.cols(), tol);
}

/// ‖a − b‖ in the spectral norm.
inline double discrepancy(const Matrix& a, const Matrix& b) { return spectral_norm(a - b); }

/// ‖a − b‖ ≤ eq_abs + eq_rel · max(‖a‖, ‖b‖).
inline bool approx_equal(const Matrix& a, const Matrix& b, const Tolerances& tol) {
  return discrepancy(a, b) <= tol.slack(std::max(spectral_norm(a), spectral_norm(b)));
}

/// Solves a · x = b for square, numerically nonsingular a (LU with partial pivoting).
inline Matrix solve_square(const Matrix& a, const Matrix& b, const Tolerances& tol = {}) {
  if (!a.is_square()) throw DimensionError("solve_square: matrix is not square");
  if (a.rows() != b.rows()) throw DimensionError("solve_square: right-hand side has wrong row count");
  const std::size_t n = a.rows();
  if (n == 0) return Matrix(0, b.cols());

  SvdFactors f;
  f.sigma = singular_values(a);
  const double smin = f.sigma.back();
  if (!(smin > rank_cutoff(f.sigma, n, n, tol))) {
    throw SingularMatrixError("solve_square: matrix is singular to tolerance (smallest singular value " +
                                  std::to_string(smin) + ")",
                              smin);
  }

  Matrix lu = a;
  Matrix x = b;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
      for (std::size_t j = 0; j < x.cols(); ++j) std::swap(x(k, j), x(piv, j));
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex l = lu(i, k) / lu(k, k);
      lu(i, k) = l;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= l * lu(k, j);
      for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= l * x(k, j);
    }
  }
  for (std::size_t kk = n; kk-- > 0;) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      Complex s = x(kk, j);
      for (std::size_t c = kk + 1; c < n; ++c) s -= lu(kk, c) * x(c, j);
      x(kk, j) = s / lu(kk, kk);
    }
  }
  return x;
}

/// Solves x · a = b for square a, via the adjoint system.
inline Matrix solve_square_right(const Matrix& a, const Matrix& b, const Tolerances& tol = {}) {
  if (b.cols() != a.rows()) throw DimensionError("solve_square_right: left-hand side has wrong column count");
  return adjoint(solve_square(adjoint(a), adjoint(b), tol));
}

inline Matrix inverse(const Matrix& a, const Tolerances& tol = {}) {
  return solve_square(a, Matrix::identity(a.rows()), tol);
}

/// Orthonormal basis of the numerical column space of a.
inline Matrix orthonormal_range_basis(const Matrix& a, const Tolerances& tol = {}) {
  if (a.empty()) return Matrix(a.rows(), 0);
  const SvdFactors f = svd(a);
  return f.u.cols_range(0, numerical_rank(f, a.rows(), a.cols(), tol));
}

/// Orthogonal projection onto the span of orthonormal columns q.
inline Matrix projector(const Matrix& q) { return q * adjoint(q); }

/// Orthonormal basis of the orthogonal complement of span(q) in ℂⁿ, n = q.rows().
inline Matrix orthonormal_complement(const Matrix& q) {
  const std::size_t n = q.rows();
  const std::size_t k = q.cols();
  if (k >= n) return Matrix(n, 0);
  // I − QQ* has singular value 1 with multiplicity n − k on the complement.
  const SvdFactors f = svd(Matrix::identity(n) - projector(q));
  return f.u.cols_range(0, n - k);
}

/// Orthonormal basis of N(a).
inline Matrix null_space_basis(const Matrix& a, const Tolerances& tol = {}) {
  if (a.cols() == 0) return Matrix(0, 0);
  if (a.rows() == 0) return Matrix::identity(a.cols());
  const SvdFactors f = svd(a);
  return orthonormal_complement(f.v.cols_range(0, numerical_rank(f, a.rows(), a.cols(), tol)));
}

/// ‖P_A − P_B‖ for subspaces given by orthonormal bases; 0 iff the subspaces coincide.
inline double principal_angle_gap(const Matrix& basis_a, const Matrix& basis_b) {
  if (basis_a.rows() != basis_b.rows()) throw DimensionError("principal_angle_gap: ambient dimensions differ");
  constexpr double orth_tol = 1e-8;
  for (const Matrix* b : {&basis_a, &basis_b}) {
    if (b->cols() == 0) continue;
    const double dev = max_abs_entry(adjoint(*b) * *b - Matrix::identity(b->cols()));
    if (dev > orth_tol) {
      throw std::invalid_argument("principal_angle_gap: basis columns are not orthonormal (deviation " +
                                  std::to_string(dev) + ")");
    }
  }
  return spectral_norm(projector(basis_a) - projector(basis_b));
}

}  // namespace pinvpert
