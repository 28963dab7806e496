#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "pinvpert/decomposition.hpp"
#include "pinvpert/errors.hpp"
#include "pinvpert/matrix.hpp"

namespace pinvpert {

/// Moore-Penrose inverse of T together with the quantities read off the same SVD.
struct PinvResult {
  Matrix pinv;                 ///< T†, shape cols × rows
  std::size_t rank = 0;
  std::vector<double> sigma;   ///< singular values of T, non-increasing
  double gamma = 0.0;          ///< reduced minimum modulus; 0 for the zero matrix
  Matrix proj_range;           ///< P_{R(T)}
  Matrix proj_rowspace;        ///< P_{N(T)^⊥}
};

/// Residuals of the four Penrose equations for a candidate inverse.
struct AxiomReport {
  double residual_tTt = 0.0;    ///< ‖T X T − T‖
  double residual_tdTtd = 0.0;  ///< ‖X T X − X‖
  double residual_sym1 = 0.0;   ///< ‖(T X)* − T X‖
  double residual_sym2 = 0.0;   ///< ‖(X T)* − X T‖
  bool passed = false;
};

inline PinvResult pseudoinverse(const Matrix& t, const Tolerances& tol = {}) {
  PinvResult r;
  r.pinv = Matrix(t.cols(), t.rows());
  r.proj_range = Matrix(t.rows(), t.rows());
  r.proj_rowspace = Matrix(t.cols(), t.cols());
  if (t.empty()) return r;

  const SvdFactors f = svd(t);
  r.sigma = f.sigma;
  r.rank = numerical_rank(f, t.rows(), t.cols(), tol);
  r.gamma = r.rank ? f.sigma[r.rank - 1] : 0.0;

  for (std::size_t k = 0; k < r.rank; ++k) {
    const double inv = 1.0 / f.sigma[k];
    for (std::size_t i = 0; i < t.cols(); ++i) {
      const Complex vik = f.v(i, k) * inv;
      for (std::size_t j = 0; j < t.rows(); ++j) r.pinv(i, j) += vik * std::conj(f.u(j, k));
    }
  }
  r.proj_range = projector(f.u.cols_range(0, r.rank));
  r.proj_rowspace = projector(f.v.cols_range(0, r.rank));
  return r;
}

/// T† alone.
inline Matrix pinv(const Matrix& t, const Tolerances& tol = {}) { return pseudoinverse(t, tol).pinv; }

/// γ(T) = inf{‖Tx‖ : ‖x‖ = 1, x ⊥ N(T)}, the smallest nonzero singular value.
inline double reduced_min_modulus(const Matrix& t, const Tolerances& tol = {}) {
  if (t.empty()) return 0.0;
  SvdFactors f;
  f.sigma = singular_values(t);
  const std::size_t r = numerical_rank(f, t.rows(), t.cols(), tol);
  return r ? f.sigma[r - 1] : 0.0;
}

/// Evaluates the four Penrose equations for `candidate` as an inverse of `t`.
/// Residuals involving T are judged against ‖T‖, those involving only the
/// candidate against ‖X‖, and the symmetric ones against the product norm.
inline AxiomReport verify_mp_axioms(const Matrix& t, const Matrix& candidate, const Tolerances& tol = {}) {
  if (candidate.rows() != t.cols() || candidate.cols() != t.rows()) {
    throw DimensionError("verify_mp_axioms: candidate must have shape cols(T) x rows(T)");
  }
  const Matrix tx = t * candidate;
  const Matrix xt = candidate * t;
  AxiomReport a;
  a.residual_tTt = spectral_norm(tx * t - t);
  a.residual_tdTtd = spectral_norm(xt * candidate - candidate);
  a.residual_sym1 = spectral_norm(adjoint(tx) - tx);
  a.residual_sym2 = spectral_norm(adjoint(xt) - xt);

  const double nt = spectral_norm(t);
  const double nx = spectral_norm(candidate);
  const double scale = std::max({1.0, nt, nx});
  // The equations are homogeneous of degree ‖T‖‖X‖‖T‖ etc.; scale by the
  // product so that a correct inverse of an ill-conditioned T still passes.
  const double prod = std::max(1.0, nt * nx);
  a.passed = tol.small(a.residual_tTt, scale * prod) && tol.small(a.residual_tdTtd, scale * prod) &&
             tol.small(a.residual_sym1, prod) && tol.small(a.residual_sym2, prod);
  return a;
}

/// Minimal-norm least-squares solution x = T† y.
inline Vector least_squares_min_norm(const Matrix& t, const Vector& y, const Tolerances& tol = {}) {
  if (y.size() != t.rows()) throw DimensionError("least_squares_min_norm: y length must equal rows(T)");
  return matvec(pinv(t, tol), y);
}

/// Computes T† by the two normal-equation routes (T*T)†T* and T*(TT*)†,
/// checks both against the SVD pseudoinverse and returns the common value.
inline Matrix mp_representation(const Matrix& t, const Tolerances& tol = {}) {
  const Matrix ts = adjoint(t);
  const Matrix reference = pinv(t, tol);
  const Matrix via_gram_right = pinv(ts * t, tol) * ts;
  const Matrix via_gram_left = ts * pinv(t * ts, tol);

  // The Gram matrices square the condition number, so the routes only
  // agree to about eps · κ².
  const double nt = spectral_norm(t);
  const double nd = spectral_norm(reference);
  const double scale = std::max(1.0, nd) * std::max(1.0, nt * nd) * std::max(1.0, nt * nd);
  const double allowed = tol.slack(scale);

  const double d1 = discrepancy(via_gram_right, reference);
  if (d1 > allowed) throw InvariantViolation("(T*T)†T* = T†", d1, allowed);
  const double d2 = discrepancy(via_gram_left, reference);
  if (d2 > allowed) throw InvariantViolation("T*(TT*)† = T†", d2, allowed);
  return reference;
}

}  // namespace pinvpert
