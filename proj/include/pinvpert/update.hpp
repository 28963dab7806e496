#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "pinvpert/decomposition.hpp"
#include "pinvpert/errors.hpp"
#include "pinvpert/hypothesis.hpp"
#include "pinvpert/matrix.hpp"
#include "pinvpert/pinv.hpp"

namespace pinvpert {

enum class UpdateMethod { stewart_left, stewart_right, relative_surjective, neumann_series };

inline std::string_view to_string(UpdateMethod m) {
  switch (m) {
    case UpdateMethod::stewart_left: return "stewart_left";
    case UpdateMethod::stewart_right: return "stewart_right";
    case UpdateMethod::relative_surjective: return "relative_surjective";
    case UpdateMethod::neumann_series: return "neumann_series";
  }
  return "unknown";
}

struct NormsUsed {
  double norm_TdS = 0.0;  ///< ‖T†S‖
  double norm_STd = 0.0;  ///< ‖ST†‖
  double norm_S = 0.0;
  double norm_Td = 0.0;   ///< ‖T†‖
};

/// A perturbed pseudoinverse (T+S)† obtained in closed form, with the
/// discrepancy to a direct SVD of T+S.
struct UpdateResult {
  Matrix pinv_updated;
  UpdateMethod method = UpdateMethod::stewart_left;
  std::optional<double> bound_apriori;  ///< bound on ‖(T+S)† − T†‖
  double oracle_discrepancy = 0.0;      ///< ‖pinv_updated − pinv(T+S)‖
  double form_discrepancy = 0.0;        ///< left/right form or recovery identity residual
  NormsUsed norms_used;
};

struct NeumannOptions {
  std::optional<double> eps_series;  ///< default 1e-12 · ‖T†‖
  std::size_t max_terms = 10'000;
};

/// Truncated series S† ≈ T† Σ_{n<N} (−(S−T)T†)ⁿ.
struct NeumannResult {
  Matrix pinv_s;
  std::size_t terms_used = 0;
  double last_term_norm = 0.0;
  double ratio = 0.0;              ///< ‖(S−T)T†‖
  double residual_bound = 0.0;     ///< ‖T†‖ ratio^terms_used / (1 − ratio)
  bool converged = false;          ///< last_term_norm < eps_series
  double eps_series = 0.0;
  double oracle_discrepancy = 0.0;       ///< ‖pinv_s − pinv(S)‖
  double closed_form_discrepancy = 0.0;  ///< ‖pinv_s − T†(I + (S−T)T†)⁻¹‖
};

/// Called with (terms summed so far, partial sum) after each term is added.
using NeumannObserver = std::function<void(std::size_t, const Matrix&)>;

namespace detail {

inline NormsUsed norms_for(const Matrix& td, const Matrix& s) {
  return {spectral_norm(td * s), spectral_norm(s * td), spectral_norm(s), spectral_norm(td)};
}

inline bool is_surjective(const Matrix& t, const Tolerances& tol) {
  return numerical_rank(t, tol) == t.rows();
}

inline bool is_injective(const Matrix& t, const Tolerances& tol) {
  return numerical_rank(t, tol) == t.cols();
}

// Solve without letting a singular system escape as a generic error.
template <typename F>
Matrix solve_or_refuse(F&& solve, const std::string& what) {
  try {
    return solve();
  } catch (const SingularMatrixError& e) {
    throw HypothesisRefusal(what + " is numerically singular (smallest singular value " +
                            std::to_string(e.smallest_sigma()) + ")");
  }
}

}  // namespace detail

/// ‖S‖‖T†‖² / (1 − ‖T†S‖), valid while ‖T†S‖ < 1.
inline double error_bound_stewart(const Matrix& t, const Matrix& s, const Tolerances& tol = {}) {
  detail::require_same_shape(t, s, "error_bound_stewart");
  const Matrix td = pinv(t, tol);
  const double ntds = spectral_norm(td * s);
  if (!tol.strictly_below(ntds, 1.0)) throw HypothesisRefusal("‖T†S‖ ≥ 1");
  const double ntd = spectral_norm(td);
  return spectral_norm(s) * ntd * ntd / (1.0 - ntds);
}

/// ‖T†‖²‖S‖ / (1 − ‖ST†‖) for surjective T with ‖ST†‖ < 1. Also checks the
/// Neumann estimate ‖(I + ST†)⁻¹‖ ≤ 1 / (1 − ‖ST†‖).
inline double error_bound_lambda2_zero(const Matrix& t, const Matrix& s, const Tolerances& tol = {}) {
  detail::require_same_shape(t, s, "error_bound_lambda2_zero");
  if (!detail::is_surjective(t, tol)) throw HypothesisRefusal("T is not surjective");
  const Matrix td = pinv(t, tol);
  const Matrix std_ = s * td;
  const double nstd = spectral_norm(std_);
  if (!tol.strictly_below(nstd, 1.0)) throw HypothesisRefusal("‖ST†‖ ≥ 1");

  const Matrix resolvent = inverse(Matrix::identity(t.rows()) + std_, tol);
  const double nres = spectral_norm(resolvent);
  const double allowed = 1.0 / (1.0 - nstd);
  if (nres > allowed + tol.slack(allowed)) {
    throw InvariantViolation("‖(I+ST†)⁻¹‖ ≤ 1/(1−‖ST†‖)", nres, allowed);
  }
  const double ntd = spectral_norm(td);
  return ntd * ntd * spectral_norm(s) / (1.0 - nstd);
}

/// (T+S)† = (I + T†S)⁻¹T† under ‖T†S‖ < 1, R(S) ⊆ R(T), N(T) ⊆ N(S).
/// The right form T†(I + ST†)⁻¹ and the recovery T† = (T+S)†(I + ST†) are
/// evaluated as internal checks.
inline UpdateResult update_stewart(const Matrix& t, const Matrix& s, const Tolerances& tol = {}) {
  const HypothesisReport h = check_stewart_hypotheses(t, s, tol);
  if (!h.verdict_stewart) throw HypothesisRefusal(h.stewart_failure());

  const Matrix td = pinv(t, tol);
  const Matrix left_op = Matrix::identity(t.cols()) + td * s;
  const Matrix right_op = Matrix::identity(t.rows()) + s * td;
  const Matrix left = detail::solve_or_refuse([&] { return solve_square(left_op, td, tol); }, "I + T†S");
  const Matrix right = detail::solve_or_refuse([&] { return solve_square_right(right_op, td, tol); }, "I + ST†");

  const double cond = std::max(1.0, spectral_norm(t) * h.norm_Td);
  const double size = h.norm_Td / (1.0 - h.norm_TdS);
  const double allowed = tol.slack(cond * size);

  UpdateResult r;
  r.method = UpdateMethod::stewart_left;
  r.norms_used = {h.norm_TdS, h.norm_STd, h.norm_S, h.norm_Td};
  r.form_discrepancy = discrepancy(left, right);
  if (r.form_discrepancy > allowed) {
    throw InvariantViolation("(I+T†S)⁻¹T† = T†(I+ST†)⁻¹", r.form_discrepancy, allowed);
  }
  const double recovery = discrepancy(left * right_op, td);
  const double recovery_allowed = tol.slack(cond * size * spectral_norm(right_op));
  if (recovery > recovery_allowed) throw InvariantViolation("T† = (T+S)†(I+ST†)", recovery, recovery_allowed);
  r.oracle_discrepancy = discrepancy(left, pinv(t + s, tol));
  r.bound_apriori = h.norm_S * h.norm_Td * h.norm_Td / (1.0 - h.norm_TdS);
  r.pinv_updated = left;
  return r;
}

/// (T+S)† = T†(I + ST†)⁻¹ for surjective T and S relatively bounded by
/// ‖Sx‖ ≤ λ₁‖Tx‖ + λ₂‖(S+T)x‖ with λ₁ < 1, λ₂ > −1.
inline UpdateResult update_relative_surjective(const Matrix& t, const Matrix& s, double lambda1, double lambda2,
                                               const Tolerances& tol = {}, std::size_t samples = 1000) {
  detail::require_same_shape(t, s, "update_relative_surjective");
  if (!(lambda1 < 1.0)) throw HypothesisRefusal("λ₁ ≥ 1");
  if (!(lambda2 > -1.0)) throw HypothesisRefusal("λ₂ ≤ −1");
  if (!detail::is_surjective(t, tol)) throw HypothesisRefusal("T is not surjective");
  const RelativeBoundCheck rb = check_relative_bound(t, s, lambda1, lambda2, samples, tol);
  if (!rb.holds) throw HypothesisRefusal("‖Sx‖ ≤ λ₁‖Tx‖ + λ₂‖(S+T)x‖ fails (worst slack " +
                                         std::to_string(rb.worst_slack) + ")");

  const Matrix td = pinv(t, tol);
  const Matrix op = Matrix::identity(t.rows()) + s * td;
  Matrix updated;
  try {
    updated = solve_square_right(op, td, tol);
  } catch (const SingularMatrixError& e) {
    throw InvariantViolation("I + ST† invertible", e.smallest_sigma(), 0.0);
  }

  const Matrix sum = t + s;
  if (!detail::is_surjective(sum, tol)) {
    throw InvariantViolation("T+S surjective", static_cast<double>(numerical_rank(sum, tol)),
                             static_cast<double>(t.rows()));
  }

  UpdateResult r;
  r.method = UpdateMethod::relative_surjective;
  r.norms_used = detail::norms_for(td, s);
  const double norm_bound = (1.0 + lambda2) / (1.0 - lambda1) * r.norms_used.norm_Td;
  const double norm_updated = spectral_norm(updated);
  if (norm_updated > norm_bound + tol.slack(norm_bound)) {
    throw InvariantViolation("‖(T+S)†‖ ≤ (1+λ₂)/(1−λ₁)‖T†‖", norm_updated, norm_bound);
  }
  r.oracle_discrepancy = discrepancy(updated, pinv(sum, tol));
  r.form_discrepancy = discrepancy(updated * op, td);
  if (lambda2 == 0.0) {
    try {
      r.bound_apriori = error_bound_lambda2_zero(t, s, tol);
    } catch (const HypothesisRefusal&) {
    }
  }
  r.pinv_updated = std::move(updated);
  return r;
}

/// S† for surjective T and S close to T, summed as a Neumann series in
/// A = (S−T)T†. Requires N(T) ⊆ N(S−T) and ‖A‖ < 1. Summation stops once a
/// term drops below eps_series or after max_terms terms.
inline NeumannResult neumann_pinv(const Matrix& t, const Matrix& s, const NeumannOptions& opts = {},
                                  const Tolerances& tol = {}, const NeumannObserver& observer = {}) {
  detail::require_same_shape(t, s, "neumann_pinv");
  if (opts.max_terms == 0) throw std::invalid_argument("neumann_pinv: max_terms must be positive");
  if (!detail::is_surjective(t, tol)) throw HypothesisRefusal("T is not surjective");

  const Matrix td = pinv(t, tol);
  const Matrix diff = s - t;
  const Matrix a = diff * td;
  NeumannResult r;
  r.ratio = spectral_norm(a);
  if (!tol.strictly_below(r.ratio, 1.0)) throw HypothesisRefusal("‖(S−T)T†‖ ≥ 1");
  if (!check_null_inclusion(t, diff, tol).holds) throw HypothesisRefusal("N(T) ⊄ N(S−T)");
  // With N(T) ⊆ N(S−T) the sharpest λ₁ for λ₂ = 0 is the ratio itself.
  if (!check_relative_bound(t, diff, r.ratio, 0.0, 200, tol).holds) {
    throw HypothesisRefusal("‖(S−T)x‖ ≤ λ₁‖Tx‖ fails for λ₁ = ‖(S−T)T†‖");
  }

  const double ntd = spectral_norm(td);
  r.eps_series = opts.eps_series.value_or(1e-12 * ntd);
  const Matrix step = -a;
  Matrix term = td;
  Matrix sum = td;
  r.terms_used = 1;
  if (observer) observer(r.terms_used, sum);

  // ‖·‖₂ ≤ ‖·‖_F ≤ √k ‖·‖₂: only pay for an SVD when the Frobenius norm
  // cannot decide the stopping test on its own.
  const double sqrt_k = std::sqrt(static_cast<double>(std::max<std::size_t>(1, std::min(t.rows(), t.cols()))));
  auto below_eps = [&](const Matrix& m) {
    const double fro = frobenius_norm(m);
    if (fro < r.eps_series) return true;
    if (fro >= r.eps_series * sqrt_k) return false;
    return spectral_norm(m) < r.eps_series;
  };

  bool done = below_eps(term);
  while (!done && r.terms_used < opts.max_terms) {
    term = term * step;
    sum += term;
    ++r.terms_used;
    if (observer) observer(r.terms_used, sum);
    done = below_eps(term);
  }
  r.converged = done;
  r.last_term_norm = spectral_norm(term);
  r.residual_bound = ntd * std::pow(r.ratio, static_cast<double>(r.terms_used)) / (1.0 - r.ratio);

  const Matrix closed = solve_square_right(Matrix::identity(t.rows()) + a, td, tol);
  r.closed_form_discrepancy = discrepancy(sum, closed);
  r.oracle_discrepancy = discrepancy(sum, pinv(s, tol));
  const double allowed = r.residual_bound + tol.slack(ntd / (1.0 - r.ratio));
  if (r.oracle_discrepancy > allowed) {
    throw InvariantViolation("‖Neumann sum − S†‖ ≤ tail bound", r.oracle_discrepancy, allowed);
  }
  if (r.closed_form_discrepancy > allowed) {
    throw InvariantViolation("‖Neumann sum − T†(I+(S−T)T†)⁻¹‖ ≤ tail bound", r.closed_form_discrepancy, allowed);
  }
  r.pinv_s = std::move(sum);
  return r;
}

struct GammaContinuity {
  double measured = 0.0;  ///< |γ(T+S) − γ(T)|
  double bound = 0.0;     ///< β‖S‖
  double beta = 0.0;      ///< ‖T†‖ / (‖(T+S)†‖ (1 − ‖T†S‖))
};

/// |γ(T+S) − γ(T)| ≤ β‖S‖ under the Stewart hypotheses.
inline GammaContinuity gamma_continuity_bound(const Matrix& t, const Matrix& s, const Tolerances& tol = {}) {
  const HypothesisReport h = check_stewart_hypotheses(t, s, tol);
  if (!h.verdict_stewart) throw HypothesisRefusal(h.stewart_failure());

  const PinvResult sum = pseudoinverse(t + s, tol);
  const double nsum = spectral_norm(sum.pinv);
  GammaContinuity g;
  g.measured = std::abs(sum.gamma - h.gamma_T);
  g.beta = nsum > 0.0 ? h.norm_Td / (nsum * (1.0 - h.norm_TdS)) : 0.0;
  g.bound = g.beta * h.norm_S;
  if (g.measured > g.bound + tol.slack(std::max(sum.gamma, h.gamma_T))) {
    throw InvariantViolation("|γ(T+S) − γ(T)| ≤ β‖S‖", g.measured, g.bound);
  }
  return g;
}

enum class DingHuangCase { injective, surjective, general };

inline std::string_view to_string(DingHuangCase c) {
  switch (c) {
    case DingHuangCase::injective: return "injective";
    case DingHuangCase::surjective: return "surjective";
    case DingHuangCase::general: return "general";
  }
  return "unknown";
}

struct DingHuangBounds {
  DingHuangCase which = DingHuangCase::general;
  double norm_pinv_sum = 0.0;          ///< ‖(T+S)†‖ from a direct SVD
  double bound_norm = 0.0;             ///< bound on ‖(T+S)†‖
  double measured_diff = 0.0;          ///< ‖(T+S)† − T†‖
  std::optional<double> bound_diff;    ///< bound on ‖(T+S)† − T†‖ (injective and surjective cases)
};

/// Norm bounds on (T+S)† for the three structural cases:
///   injective:  R(S) ⊆ R(T), ‖T†S‖ < 1   →  ‖(T+S)†‖ ≤ ‖T†‖ / (1 − ‖T†S‖)
///   surjective: N(T) ⊆ N(S), ‖ST†‖ < 1   →  ‖(T+S)†‖ ≤ ‖T†‖ / (1 − ‖ST†‖)
///   general:    N(T) ⊆ N(S), ‖S‖‖T†‖ < 1 →  ‖(T+S)†‖ ≤ ‖T†‖ / (1 − ‖S‖‖T†‖)
inline DingHuangBounds norm_bounds_ding_huang(const Matrix& t, const Matrix& s, DingHuangCase which,
                                              const Tolerances& tol = {}) {
  detail::require_same_shape(t, s, "norm_bounds_ding_huang");
  const Matrix td = pinv(t, tol);
  const NormsUsed n = detail::norms_for(td, s);
  const Matrix sum = t + s;
  const Matrix sum_pinv = pinv(sum, tol);

  DingHuangBounds b;
  b.which = which;
  b.norm_pinv_sum = spectral_norm(sum_pinv);
  b.measured_diff = discrepancy(sum_pinv, td);
  const std::string tag = std::string(to_string(which)) + " case: ";

  switch (which) {
    case DingHuangCase::injective: {
      if (!detail::is_injective(t, tol)) throw HypothesisRefusal(tag + "T is not injective");
      if (!check_range_inclusion(t, s, tol).holds) throw HypothesisRefusal(tag + "R(S) ⊄ R(T)");
      if (!tol.strictly_below(n.norm_TdS, 1.0)) throw HypothesisRefusal(tag + "‖T†S‖ ≥ 1");
      if (!detail::is_injective(sum, tol)) throw InvariantViolation("T+S injective", 0.0, 0.0);
      b.bound_norm = n.norm_Td / (1.0 - n.norm_TdS);
      b.bound_diff = n.norm_TdS * n.norm_Td / (1.0 - n.norm_TdS);
      break;
    }
    case DingHuangCase::surjective: {
      if (!detail::is_surjective(t, tol)) throw HypothesisRefusal(tag + "T is not surjective");
      if (!check_null_inclusion(t, s, tol).holds) throw HypothesisRefusal(tag + "N(T) ⊄ N(S)");
      if (!tol.strictly_below(n.norm_STd, 1.0)) throw HypothesisRefusal(tag + "‖ST†‖ ≥ 1");
      if (!detail::is_surjective(sum, tol)) throw InvariantViolation("T+S surjective", 0.0, 0.0);
      b.bound_norm = n.norm_Td / (1.0 - n.norm_STd);
      b.bound_diff = n.norm_STd * n.norm_Td / (1.0 - n.norm_STd);
      break;
    }
    case DingHuangCase::general: {
      if (!check_null_inclusion(t, s, tol).holds) throw HypothesisRefusal(tag + "N(T) ⊄ N(S)");
      if (!tol.strictly_below(n.norm_S * n.norm_Td, 1.0)) throw HypothesisRefusal(tag + "‖S‖‖T†‖ ≥ 1");
      const double gap = principal_angle_gap(null_space_basis(sum, tol), null_space_basis(t, tol));
      if (gap > 1e-8) throw InvariantViolation("N(T+S) = N(T)", gap, 1e-8);
      b.bound_norm = n.norm_Td / (1.0 - n.norm_S * n.norm_Td);
      break;
    }
  }
  if (b.norm_pinv_sum > b.bound_norm + tol.slack(b.bound_norm)) {
    throw InvariantViolation(tag + "‖(T+S)†‖ bound", b.norm_pinv_sum, b.bound_norm);
  }
  if (b.bound_diff && b.measured_diff > *b.bound_diff + tol.slack(b.bound_norm)) {
    throw InvariantViolation(tag + "‖(T+S)† − T†‖ bound", b.measured_diff, *b.bound_diff);
  }
  return b;
}

}  // namespace pinvpert
