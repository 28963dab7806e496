#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pinvpert/decomposition.hpp"
#include "pinvpert/errors.hpp"
#include "pinvpert/matrix.hpp"
#include "pinvpert/pinv.hpp"
#include "pinvpert/random.hpp"

namespace pinvpert {

struct GenSpec {
  std::size_t rows = 1;
  std::size_t cols = 1;
  std::size_t rank = 1;
  double gamma_target = 1.0;  ///< smallest nonzero singular value
  double norm_target = 1.0;   ///< largest singular value
  std::uint64_t seed = 0;
};

/// U · diag(σ) · V* with random isometries U, V and σ₁ = norm_target,
/// σ_rank = gamma_target; remaining singular values are uniform in between.
inline Matrix random_operator(const GenSpec& spec) {
  if (spec.rows == 0 || spec.cols == 0) throw std::invalid_argument("random_operator: empty shape");
  if (spec.rank > std::min(spec.rows, spec.cols)) throw std::invalid_argument("random_operator: rank exceeds min(rows, cols)");
  if (spec.rank == 0) return Matrix(spec.rows, spec.cols);
  if (!(spec.gamma_target > 0.0 && spec.gamma_target <= spec.norm_target)) {
    throw std::invalid_argument("random_operator: need 0 < gamma_target <= norm_target");
  }
  if (spec.rank == 1 && spec.gamma_target != spec.norm_target) {
    throw std::invalid_argument("random_operator: rank 1 requires gamma_target == norm_target");
  }

  Rng rng(spec.seed);
  std::vector<double> sigma(spec.rank);
  sigma.front() = spec.norm_target;
  sigma.back() = spec.gamma_target;
  for (std::size_t k = 1; k + 1 < spec.rank; ++k) sigma[k] = uniform(rng, spec.gamma_target, spec.norm_target);
  std::sort(sigma.begin(), sigma.end(), std::greater<>());

  Matrix u = random_isometry(spec.rows, spec.rank, rng);
  const Matrix v = random_isometry(spec.cols, spec.rank, rng);
  for (std::size_t i = 0; i < u.rows(); ++i)
    for (std::size_t k = 0; k < spec.rank; ++k) u(i, k) *= sigma[k];
  return u * adjoint(v);
}

/// U · diag(d) · V* with d uniform in [0, 1]; ‖W‖ ≤ 1.
inline Matrix random_contraction(std::size_t n, Rng& rng) {
  Matrix u = random_unitary(n, rng);
  const Matrix v = random_unitary(n, rng);
  for (std::size_t k = 0; k < n; ++k) {
    const double d = uniform(rng, 0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) u(i, k) *= d;
  }
  return u * adjoint(v);
}

/// S_α = α T (I + T*T)⁻¹ for 0 < α < 2/‖T†‖. Satisfies ‖S_α‖ ≤ α/2 and the
/// three Stewart hypotheses against T.
inline Matrix s_alpha(const Matrix& t, double alpha, const Tolerances& tol = {}) {
  const double ntd = spectral_norm(pinv(t, tol));
  if (!(alpha > 0.0) || !(alpha * ntd < 2.0)) {
    throw std::invalid_argument("s_alpha: alpha must lie in (0, 2/‖T†‖)");
  }
  const Matrix gram = Matrix::identity(t.cols()) + adjoint(t) * t;
  Matrix s = solve_square_right(gram, t, tol);
  s *= alpha;
  const double ns = spectral_norm(s);
  if (ns > alpha / 2 + tol.slack(alpha)) throw InvariantViolation("‖T(I+T*T)⁻¹‖ ≤ 1/2", ns / alpha, 0.5);
  return s;
}

/// ‖(I + TT*)⁻¹T − T(I + T*T)⁻¹‖, which vanishes for every T.
inline double commute_identity_check(const Matrix& t, const Tolerances& tol = {}) {
  const Matrix ts = adjoint(t);
  const Matrix lhs = solve_square(Matrix::identity(t.rows()) + t * ts, t, tol);
  const Matrix rhs = solve_square_right(Matrix::identity(t.cols()) + ts * t, t, tol);
  const double d = discrepancy(lhs, rhs);
  const double allowed = tol.slack(spectral_norm(t));
  if (d > allowed) throw InvariantViolation("(I+TT*)⁻¹T = T(I+T*T)⁻¹", d, allowed);
  return d;
}

/// S = λ₁ W T for a given contraction W, so ‖Sx‖ ≤ λ₁‖Tx‖ and N(T) ⊆ N(S).
inline Matrix relative_perturbation(const Matrix& t, double lambda1, const Matrix& w) {
  if (!(lambda1 >= 0.0 && lambda1 < 1.0)) throw std::invalid_argument("relative perturbation: need 0 <= λ₁ < 1");
  if (w.rows() != t.rows() || !w.is_square()) throw DimensionError("relative perturbation: W must be rows(T) square");
  return lambda1 * (w * t);
}

inline Matrix random_relative_perturbation(const Matrix& t, double lambda1, std::uint64_t seed) {
  if (!(lambda1 >= 0.0 && lambda1 < 1.0)) throw std::invalid_argument("random_relative_perturbation: need 0 <= λ₁ < 1");
  Rng rng(seed);
  return relative_perturbation(t, lambda1, random_contraction(t.rows(), rng));
}

enum class AdversarialKind { range_violation, null_violation, norm_violation };

inline std::string_view to_string(AdversarialKind k) {
  switch (k) {
    case AdversarialKind::range_violation: return "range_violation";
    case AdversarialKind::null_violation: return "null_violation";
    case AdversarialKind::norm_violation: return "norm_violation";
  }
  return "unknown";
}

/// A rank-2 4×3 operator T and a perturbation S that breaks exactly one
/// Stewart hypothesis while keeping the others.
inline std::pair<Matrix, Matrix> adversarial_pair(AdversarialKind kind, std::uint64_t seed) {
  const Matrix t = random_operator({4, 3, 2, 1.0, 2.0, seed});
  const Tolerances tol;
  const Matrix range = orthonormal_range_basis(t, tol);
  const Matrix coker = orthonormal_complement(range);
  const Matrix null = null_space_basis(t, tol);
  const Matrix row = orthonormal_complement(null);

  switch (kind) {
    case AdversarialKind::range_violation:
      // R(S) ⟂ R(T), S vanishes on N(T), T†S = 0.
      return {t, 0.5 * (coker.cols_range(0, 1) * adjoint(row.cols_range(0, 1)))};
    case AdversarialKind::null_violation:
      // R(S) ⊆ R(T), S does not vanish on N(T), ‖T†S‖ ≤ 1/2.
      return {t, 0.5 * (range.cols_range(1, 1) * adjoint(null.cols_range(0, 1)))};
    case AdversarialKind::norm_violation:
      return {t, 2.0 * t};
  }
  throw std::invalid_argument("adversarial_pair: unknown kind");
}

}  // namespace pinvpert
