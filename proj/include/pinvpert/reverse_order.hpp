#pragma once

#include <algorithm>

#include "pinvpert/decomposition.hpp"
#include "pinvpert/errors.hpp"
#include "pinvpert/matrix.hpp"
#include "pinvpert/pinv.hpp"

namespace pinvpert {

/// Three routes to (FG)†.
struct FactoredPinv {
  Matrix a;                 ///< FG
  Matrix pinv_reverse;      ///< G†F†
  Matrix pinv_closed_form;  ///< G*(GG*)⁻¹(F*F)⁻¹F*
  Matrix pinv_oracle;       ///< direct SVD pseudoinverse of FG
  double max_pairwise_discrepancy = 0.0;
};

/// F has full column rank and G has full row rank.
inline bool check_rol_hypotheses(const Matrix& f, const Matrix& g, const Tolerances& tol = {}) {
  if (f.cols() != g.rows()) throw DimensionError("check_rol_hypotheses: cols(F) must equal rows(G)");
  return numerical_rank(f, tol) == f.cols() && numerical_rank(g, tol) == g.rows();
}

/// (FG)† = G†F† = G*(GG*)⁻¹(F*F)⁻¹F* for F of full column rank and G of full
/// row rank. Also checks A†F = G*(GG*)⁻¹ and GA† = (F*F)⁻¹F*.
inline FactoredPinv reverse_order_pinv(const Matrix& f, const Matrix& g, const Tolerances& tol = {}) {
  if (!check_rol_hypotheses(f, g, tol)) {
    if (numerical_rank(f, tol) != f.cols()) throw HypothesisRefusal("F does not have full column rank");
    throw HypothesisRefusal("G does not have full row rank");
  }
  const Matrix fs = adjoint(f);
  const Matrix gs = adjoint(g);

  FactoredPinv r;
  r.a = f * g;
  r.pinv_oracle = pinv(r.a, tol);
  const Matrix fd = pinv(f, tol);
  const Matrix gd = pinv(g, tol);
  r.pinv_reverse = gd * fd;

  Matrix g_right, f_left;  // G*(GG*)⁻¹ and (F*F)⁻¹F*
  try {
    g_right = solve_square_right(g * gs, gs, tol);
    f_left = solve_square(fs * f, fs, tol);
  } catch (const SingularMatrixError& e) {
    throw InvariantViolation("GG* and F*F invertible", e.smallest_sigma(), 0.0);
  }
  r.pinv_closed_form = g_right * f_left;

  r.max_pairwise_discrepancy = std::max({discrepancy(r.pinv_reverse, r.pinv_oracle),
                                         discrepancy(r.pinv_closed_form, r.pinv_oracle),
                                         discrepancy(r.pinv_closed_form, r.pinv_reverse)});

  const double nf = spectral_norm(f), nfd = spectral_norm(fd);
  const double ng = spectral_norm(g), ngd = spectral_norm(gd);
  const double cond = std::max(1.0, nf * nfd) * std::max(1.0, ng * ngd);
  const double scale = cond * cond * std::max(1.0, nfd * ngd);
  const double allowed = tol.slack(scale);

  if (r.max_pairwise_discrepancy > allowed) {
    throw InvariantViolation("A† = G†F† = G*(GG*)⁻¹(F*F)⁻¹F*", r.max_pairwise_discrepancy, allowed);
  }
  const double d1 = discrepancy(r.pinv_oracle * f, g_right);
  if (d1 > allowed) throw InvariantViolation("A†F = G*(GG*)⁻¹", d1, allowed);
  const double d2 = discrepancy(g * r.pinv_oracle, f_left);
  if (d2 > allowed) throw InvariantViolation("GA† = (F*F)⁻¹F*", d2, allowed);
  return r;
}

}  // namespace pinvpert
