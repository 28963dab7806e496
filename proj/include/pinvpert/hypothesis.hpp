#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pinvpert/decomposition.hpp"
#include "pinvpert/errors.hpp"
#include "pinvpert/matrix.hpp"
#include "pinvpert/pinv.hpp"
#include "pinvpert/random.hpp"

namespace pinvpert {

/// Outcome of a subspace-inclusion test, decided two independent ways.
struct InclusionCheck {
  bool holds = false;
  double residual = 0.0;            ///< projection/basis route
  double algebraic_residual = 0.0;  ///< TT†S − S or ST†T − S route
};

/// Quantities and verdicts for the perturbation hypothesis sets of a pair (T, S).
struct HypothesisReport {
  double norm_TdS = 0.0;            ///< ‖T†S‖
  double norm_STd = 0.0;            ///< ‖ST†‖
  double norm_S = 0.0;
  double norm_Td = 0.0;             ///< ‖T†‖
  double gamma_T = 0.0;
  double range_incl_residual = 0.0; ///< ‖(I − P_{R(T)})S‖
  double null_incl_residual = 0.0;  ///< ‖S Z_T‖, Z_T orthonormal basis of N(T)
  double ttds_residual = 0.0;       ///< ‖TT†S − S‖
  double stdt_residual = 0.0;       ///< ‖ST†T − S‖
  bool range_inclusion = false;     ///< R(S) ⊆ R(T)
  bool null_inclusion = false;      ///< N(T) ⊆ N(S)
  std::optional<double> lambda1_min;
  bool verdict_stewart = false;     ///< ‖T†S‖ < 1, TT†S = S, ST†T = S
  bool verdict_norm_gamma = false;  ///< ‖S‖ < γ(T), N(T) ⊆ N(S)
  bool verdict_relative = false;    ///< ‖Sx‖ ≤ λ₁‖Tx‖ with some λ₁ < 1

  /// First failing Stewart condition, empty when verdict_stewart holds.
  std::string stewart_failure() const {
    if (verdict_stewart) return {};
    if (!range_inclusion) return "R(S) ⊄ R(T) (TT†S ≠ S)";
    if (!null_inclusion) return "N(T) ⊄ N(S) (ST†T ≠ S)";
    return "‖T†S‖ ≥ 1";
  }
};

namespace detail {

inline void require_same_shape(const Matrix& t, const Matrix& s, const char* op) {
  if (t.rows() != s.rows() || t.cols() != s.cols()) {
    throw DimensionError(std::string(op) + ": T and S must have the same shape");
  }
}

inline double condition_scale(const Matrix& t, const Matrix& td) {
  return std::max(1.0, spectral_norm(t) * spectral_norm(td));
}

}  // namespace detail

/// R(S) ⊆ R(T), decided by ‖(I − P_{R(T)})S‖ and cross-checked against ‖TT†S − S‖.
inline InclusionCheck check_range_inclusion(const Matrix& t, const Matrix& s, const Tolerances& tol = {}) {
  detail::require_same_shape(t, s, "check_range_inclusion");
  const PinvResult p = pseudoinverse(t, tol);
  const double ns = spectral_norm(s);

  InclusionCheck c;
  c.residual = spectral_norm(s - p.proj_range * s);
  c.algebraic_residual = spectral_norm(t * (p.pinv * s) - s);
  c.holds = tol.small(c.residual, ns);
  const bool algebraic = tol.small(c.algebraic_residual, ns * detail::condition_scale(t, p.pinv));
  if (c.holds != algebraic) {
    throw InvariantViolation("range inclusion: projection and TT†S verdicts disagree", c.algebraic_residual,
                             tol.slack(ns));
  }
  return c;
}

/// N(T) ⊆ N(S), decided by ‖S Z_T‖ and cross-checked against ‖ST†T − S‖.
inline InclusionCheck check_null_inclusion(const Matrix& t, const Matrix& s, const Tolerances& tol = {}) {
  detail::require_same_shape(t, s, "check_null_inclusion");
  const Matrix td = pinv(t, tol);
  const Matrix z = null_space_basis(t, tol);
  const double ns = spectral_norm(s);

  InclusionCheck c;
  c.residual = spectral_norm(s * z);
  c.algebraic_residual = spectral_norm(s * (td * t) - s);
  c.holds = tol.small(c.residual, ns);
  const bool algebraic = tol.small(c.algebraic_residual, ns * detail::condition_scale(t, td));
  if (c.holds != algebraic) {
    throw InvariantViolation("null inclusion: basis and ST†T verdicts disagree", c.algebraic_residual,
                             tol.slack(ns));
  }
  return c;
}

/// Smallest λ₁ with ‖Sx‖ ≤ λ₁‖Tx‖ for all x (λ₂ = 0), i.e. ‖ST†‖, when N(T) ⊆ N(S).
/// Absent otherwise, since then some x has Tx = 0 but Sx ≠ 0.
inline std::optional<double> estimate_lambda1(const Matrix& t, const Matrix& s, const Tolerances& tol = {}) {
  detail::require_same_shape(t, s, "estimate_lambda1");
  if (!check_null_inclusion(t, s, tol).holds) return std::nullopt;
  return spectral_norm(s * pinv(t, tol));
}

/// Every hypothesis set at once.
inline HypothesisReport check_stewart_hypotheses(const Matrix& t, const Matrix& s, const Tolerances& tol = {}) {
  detail::require_same_shape(t, s, "check_stewart_hypotheses");
  const PinvResult p = pseudoinverse(t, tol);
  const Matrix& td = p.pinv;

  HypothesisReport h;
  h.norm_TdS = spectral_norm(td * s);
  h.norm_STd = spectral_norm(s * td);
  h.norm_S = spectral_norm(s);
  h.norm_Td = spectral_norm(td);
  h.gamma_T = p.gamma;

  const InclusionCheck range = check_range_inclusion(t, s, tol);
  const InclusionCheck null = check_null_inclusion(t, s, tol);
  h.range_incl_residual = range.residual;
  h.ttds_residual = range.algebraic_residual;
  h.null_incl_residual = null.residual;
  h.stdt_residual = null.algebraic_residual;
  h.range_inclusion = range.holds;
  h.null_inclusion = null.holds;

  if (h.null_inclusion) h.lambda1_min = h.norm_STd;

  h.verdict_stewart = tol.strictly_below(h.norm_TdS, 1.0) && h.range_inclusion && h.null_inclusion;
  h.verdict_norm_gamma = tol.strictly_below(h.norm_S, h.gamma_T) && h.null_inclusion;
  h.verdict_relative = h.lambda1_min.has_value() && tol.strictly_below(*h.lambda1_min, 1.0);
  return h;
}

struct RelativeBoundCheck {
  bool holds = false;
  /// min over tested x of λ₁‖Tx‖ + λ₂‖(S+T)x‖ − ‖Sx‖
  double worst_slack = std::numeric_limits<double>::infinity();
  std::size_t directions_tested = 0;
};

/// Unit directions at which the relative bound is most likely to be tight:
/// right singular vectors of T, S and T+S, a basis of N(T), and the
/// preimages T†y of the right singular vectors y of ST†.
inline std::vector<Vector> extremal_directions(const Matrix& t, const Matrix& s, const Tolerances& tol = {}) {
  std::vector<Vector> dirs;
  auto add_columns = [&dirs](const Matrix& m) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      Vector x = m.col(j);
      const double len = norm2(x);
      if (len == 0.0) continue;
      for (auto& z : x) z /= len;
      dirs.push_back(std::move(x));
    }
  };
  if (t.empty()) return dirs;
  add_columns(svd(t).v);
  add_columns(svd(s).v);
  add_columns(svd(s + t).v);
  add_columns(null_space_basis(t, tol));
  const Matrix td = pinv(t, tol);
  add_columns(td * svd(s * td).v);
  return dirs;
}

/// Samples ‖Sx‖ ≤ λ₁‖Tx‖ + λ₂‖(S+T)x‖ on `samples` random unit vectors plus the
/// extremal directions. The bound is certified when the worst slack is ≥ −tol.
inline RelativeBoundCheck check_relative_bound(const Matrix& t, const Matrix& s, double lambda1, double lambda2,
                                               std::size_t samples = 1000, const Tolerances& tol = {},
                                               std::uint64_t seed = 0x5eedULL) {
  detail::require_same_shape(t, s, "check_relative_bound");
  if (!(lambda1 < 1.0)) throw std::invalid_argument("check_relative_bound: requires λ₁ < 1");

  const Matrix sum = s + t;
  RelativeBoundCheck c;
  auto probe = [&](const Vector& x) {
    const double slack = lambda1 * norm2(matvec(t, x)) + lambda2 * norm2(matvec(sum, x)) - norm2(matvec(s, x));
    c.worst_slack = std::min(c.worst_slack, slack);
    ++c.directions_tested;
  };

  for (const Vector& x : extremal_directions(t, s, tol)) probe(x);
  Rng rng(seed);
  for (std::size_t k = 0; k < samples && t.cols() > 0; ++k) probe(random_unit_vector(t.cols(), rng));

  const double scale = std::max({spectral_norm(t), spectral_norm(s), 1.0});
  c.holds = c.directions_tested == 0 || c.worst_slack >= -tol.slack(scale);
  if (c.directions_tested == 0) c.worst_slack = 0.0;
  return c;
}

}  // namespace pinvpert
