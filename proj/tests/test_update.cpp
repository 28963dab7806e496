#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pinvpert/generators.hpp"
#include "pinvpert/update.hpp"

using namespace pinvpert;

namespace {

constexpr double kTight = 1e-12;

Matrix surjective_operator(Rng& rng, std::size_t rows, std::size_t cols) {
  return random_operator({rows, cols, rows, rows == 1 ? 1.0 : 0.5, 1.0, rng()});
}

}  // namespace

TEST(UpdateStewart, Examples) {
  const Tolerances tol;
  const Matrix t = random_operator({4, 3, 2, 1.0, 2.0, 1});
  const UpdateResult zero = update_stewart(t, Matrix(4, 3), tol);
  EXPECT_LT(max_abs_entry(zero.pinv_updated - pinv(t, tol)), kTight);
  EXPECT_EQ(*zero.bound_apriori, 0.0);

  const UpdateResult d = update_stewart(Matrix::diagonal({1, 0}), Matrix::diagonal({0.5, 0}), tol);
  EXPECT_LT(max_abs_entry(d.pinv_updated - Matrix::diagonal({2.0 / 3.0, 0})), kTight);
  EXPECT_LT(d.oracle_discrepancy, kTight);
  EXPECT_EQ(d.method, UpdateMethod::stewart_left);

  const Matrix tall{{1, 0}, {0, 0}, {0, 0}};
  const UpdateResult scaled = update_stewart(tall, 0.2 * tall, tol);
  EXPECT_LT(max_abs_entry(scaled.pinv_updated - pinv(tall, tol) * (1.0 / 1.2)), kTight);
}

TEST(UpdateStewart, RefusesEachViolatedHypothesis) {
  const Tolerances tol;
  const std::pair<AdversarialKind, std::string> cases[] = {
      {AdversarialKind::range_violation, "R(S) ⊄ R(T) (TT†S ≠ S)"},
      {AdversarialKind::null_violation, "N(T) ⊄ N(S) (ST†T ≠ S)"},
      {AdversarialKind::norm_violation, "‖T†S‖ ≥ 1"},
  };
  for (const auto& [kind, condition] : cases) {
    const auto [t, s] = adversarial_pair(kind, 3);
    try {
      update_stewart(t, s, tol);
      ADD_FAILURE() << to_string(kind) << " was not refused";
    } catch (const HypothesisRefusal& e) {
      EXPECT_EQ(e.condition(), condition);
    }
  }
}

TEST(UpdateStewart, MatchesQrOracleOnSAlphaPairs) {
  const Tolerances tol;
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix t = random_operator({7, 5, std::size_t(1 + trial % 5), trial % 5 == 0 ? 1.0 : 0.3, 1.0, rng()});
    const double ntd = spectral_norm(pinv(t, tol));
    const Matrix s = s_alpha(t, uniform(rng, 0.01, 1.99) / ntd, tol);
    const UpdateResult u = update_stewart(t, s, tol);
    EXPECT_LE(spectral_norm(u.pinv_updated - oracle::qr_pinv(t + s, 1e-10)), 1e-8 * ntd);
    EXPECT_LE(u.form_discrepancy, 1e-9);
    EXPECT_GE(*u.bound_apriori + 1e-10, spectral_norm(u.pinv_updated - pinv(t, tol)));
  }
}

TEST(UpdateRelative, Examples) {
  const Tolerances tol;
  Rng rng(3);
  const Matrix t = surjective_operator(rng, 2, 4);
  EXPECT_LT(max_abs_entry(update_relative_surjective(t, Matrix(2, 4), 0.0, 0.0, tol).pinv_updated - pinv(t, tol)),
            kTight);

  const UpdateResult row = update_relative_surjective(Matrix{{1, 0}}, Matrix{{0.5, 0}}, 0.5, 0.0, tol);
  EXPECT_LT(max_abs_entry(row.pinv_updated - Matrix{{1.0 / 1.5}, {0}}), kTight);
  EXPECT_EQ(row.method, UpdateMethod::relative_surjective);

  const Matrix u = random_unitary(2, rng);
  const UpdateResult rot = update_relative_surjective(Matrix::identity(2), 0.3 * u, 0.3, 0.0, tol);
  EXPECT_LT(rot.oracle_discrepancy, 1e-9);
  EXPECT_LT(spectral_norm(rot.pinv_updated - oracle::qr_pinv(Matrix::identity(2) + 0.3 * u)), 1e-9);
}

TEST(UpdateRelative, Refusals) {
  const Tolerances tol;
  const Matrix tall{{1}, {0}};
  EXPECT_THROW(update_relative_surjective(tall, Matrix(2, 1), 0.5, 0.0, tol), HypothesisRefusal);
  EXPECT_THROW(update_relative_surjective(Matrix{{1, 0}}, Matrix{{0.5, 0}}, 0.3, 0.0, tol), HypothesisRefusal);
  EXPECT_THROW(update_relative_surjective(Matrix{{1, 0}}, Matrix{{0, 0}}, 1.0, 0.0, tol), HypothesisRefusal);
  EXPECT_THROW(update_relative_surjective(Matrix{{1, 0}}, Matrix{{0, 0}}, 0.5, -1.0, tol), HypothesisRefusal);
}

TEST(UpdateRelative, GrowthNullSpaceAndGammaConsequences) {
  const Tolerances tol;
  Rng rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    const std::uint64_t seed = rng();
    const Matrix t = random_operator({5, 4, std::size_t(1 + trial % 4), trial % 4 == 0 ? 1.0 : 0.3, 1.0, seed});
    const double l1 = uniform(rng, 0.0, 0.9);
    const Matrix s = random_relative_perturbation(t, l1, seed + 1);
    ASSERT_TRUE(check_relative_bound(t, s, l1, 0.0, 200, tol).holds);
    const Matrix sum = t + s;
    Rng probe(seed);
    for (int k = 0; k < 100; ++k) {
      const Vector x = random_unit_vector(4, probe);
      EXPECT_GE(norm2(matvec(sum, x)) + 1e-12, (1 - l1) * norm2(matvec(t, x)));
    }
    EXPECT_LE(principal_angle_gap(null_space_basis(sum, tol), null_space_basis(t, tol)), 1e-8);
    EXPECT_TRUE(check_null_inclusion(t, s, tol).holds);
    EXPECT_GE(reduced_min_modulus(sum, tol), (1 - l1) * reduced_min_modulus(t, tol) - 1e-10);
  }
}

TEST(UpdateRelative, TwoSidedInequalityForIPlusA) {
  // ‖Ax‖ ≤ λ₁‖x‖ + λ₂‖(I+A)x‖ implies (1−λ₁)/(1+λ₂) ≤ ‖(I+A)x‖ ≤ (1+λ₁)/(1−λ₂).
  const Tolerances tol;
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 4;
    const double l1 = uniform(rng, 0.0, 0.6);
    const double l2 = uniform(rng, 0.0, 0.3);
    const Matrix a = l1 * random_contraction(n, rng);
    const Matrix id = Matrix::identity(n);
    ASSERT_TRUE(check_relative_bound(id, a, l1, l2, 200, tol).holds);
    for (int k = 0; k < 100; ++k) {
      const Vector x = random_unit_vector(n, rng);
      const double len = norm2(matvec(id + a, x));
      EXPECT_GE(len + 1e-12, (1 - l1) / (1 + l2));
      EXPECT_LE(len, (1 + l1) / (1 - l2) + 1e-12);
    }
  }
}

TEST(Neumann, Examples) {
  const Tolerances tol;
  Rng rng(6);
  const Matrix t = surjective_operator(rng, 3, 5);
  const NeumannResult same = neumann_pinv(t, t, {}, tol);
  // T† itself, then the zero term that ends the series.
  EXPECT_EQ(same.terms_used, 2u);
  EXPECT_LT(max_abs_entry(same.pinv_s - pinv(t, tol)), kTight);

  NeumannOptions opts;
  opts.eps_series = 1e-14;
  const NeumannResult row = neumann_pinv(Matrix{{1, 0}}, Matrix{{1.2, 0}}, opts, tol);
  EXPECT_NEAR(row.ratio, 0.2, kTight);
  EXPECT_LT(max_abs_entry(row.pinv_s - Matrix{{1 / 1.2}, {0}}), 1e-13);
  EXPECT_TRUE(row.converged);

  // S = I + N with ‖N‖ = 0.4.
  const Matrix n = 0.4 * random_unitary(2, rng);
  const double eps = 1e-10;
  opts.eps_series = eps;
  const NeumannResult sq = neumann_pinv(Matrix::identity(2), Matrix::identity(2) + n, opts, tol);
  EXPECT_NEAR(sq.ratio, 0.4, 1e-12);
  EXPECT_LE(sq.terms_used, static_cast<std::size_t>(std::ceil(std::log(eps) / std::log(0.4))) + 1);
  EXPECT_NEAR(sq.residual_bound, std::pow(0.4, static_cast<double>(sq.terms_used)) / 0.6, 1e-15);
}

TEST(Neumann, PartialSumsStayWithinTailBound) {
  const Tolerances tol;
  Rng rng(7);
  const Matrix t = surjective_operator(rng, 3, 4);
  const Matrix s = t + random_relative_perturbation(t, 0.7, 8);
  const Matrix direct = pinv(s, tol);
  const double ntd = spectral_norm(pinv(t, tol));
  std::vector<double> errors;
  const NeumannResult r = neumann_pinv(t, s, {}, tol, [&](std::size_t n, const Matrix& partial) {
    errors.push_back(spectral_norm(partial - direct));
    EXPECT_EQ(errors.size(), n);
  });
  const double ratio = r.ratio;
  for (std::size_t n = 1; n <= errors.size(); ++n) {
    EXPECT_LE(errors[n - 1], ntd * std::pow(ratio, static_cast<double>(n)) / (1 - ratio) + 1e-10) << n;
  }
  EXPECT_LE(r.oracle_discrepancy, r.residual_bound + 1e-10);
  EXPECT_LE(r.closed_form_discrepancy, r.residual_bound + 1e-10);
}

TEST(Neumann, RefusalsAndNonConvergence) {
  const Tolerances tol;
  EXPECT_THROW(neumann_pinv(Matrix{{1}, {0}}, Matrix{{1}, {0}}, {}, tol), HypothesisRefusal);
  EXPECT_THROW(neumann_pinv(Matrix{{1, 0}}, Matrix{{2.5, 0}}, {}, tol), HypothesisRefusal);
  EXPECT_THROW(neumann_pinv(Matrix{{1, 0}}, Matrix{{1, 0.5}}, {}, tol), HypothesisRefusal);

  NeumannOptions capped;
  capped.max_terms = 3;
  const NeumannResult r = neumann_pinv(Matrix{{1, 0}}, Matrix{{1.5, 0}}, capped, tol);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.terms_used, 3u);
  EXPECT_NEAR(r.residual_bound, std::pow(0.5, 3) / 0.5, kTight);
}

TEST(ErrorBoundStewart, Examples) {
  const Tolerances tol;
  EXPECT_EQ(error_bound_stewart(Matrix::identity(2), Matrix(2, 2), tol), 0.0);
  EXPECT_NEAR(error_bound_stewart(Matrix::diagonal({1, 0}), Matrix::diagonal({0.5, 0}), tol), 1.0, kTight);
  EXPECT_NEAR(error_bound_stewart(Matrix::identity(2), 0.1 * Matrix::identity(2), tol), 0.1 / 0.9, kTight);
  const double actual = spectral_norm(pinv(1.1 * Matrix::identity(2), tol) - Matrix::identity(2));
  EXPECT_NEAR(actual, 1 - 1 / 1.1, kTight);
  EXPECT_THROW(error_bound_stewart(Matrix::identity(2), Matrix::identity(2), tol), HypothesisRefusal);
}

TEST(ErrorBoundLambda2Zero, ExamplesAndMonotonicity) {
  const Tolerances tol;
  EXPECT_EQ(error_bound_lambda2_zero(Matrix{{1, 0}}, Matrix{{0, 0}}, tol), 0.0);
  EXPECT_NEAR(error_bound_lambda2_zero(Matrix{{1, 0}}, Matrix{{0.5, 0}}, tol), 1.0, kTight);
  EXPECT_NEAR(spectral_norm(pinv(Matrix{{1.5, 0}}, tol) - pinv(Matrix{{1, 0}}, tol)), 1.0 / 3.0, kTight);

  Rng rng(9);
  const Matrix u = random_unitary(2, rng);
  double previous = 0.0;
  for (double k : {0.1, 0.5, 0.9, 0.99}) {
    const double b = error_bound_lambda2_zero(Matrix::identity(2), k * u, tol);
    EXPECT_NEAR(b, k / (1 - k), 1e-12 * (1 + b));
    EXPECT_GT(b, previous);
    previous = b;
  }
  EXPECT_NEAR(previous, 99.0, 1e-9);
  EXPECT_THROW(error_bound_lambda2_zero(Matrix{{1}, {0}}, Matrix{{0}, {0}}, tol), HypothesisRefusal);
}

TEST(GammaContinuity, Examples) {
  const Tolerances tol;
  const Matrix t = random_operator({3, 3, 2, 1.0, 2.0, 1});
  const GammaContinuity zero = gamma_continuity_bound(t, Matrix(3, 3), tol);
  EXPECT_LT(zero.measured, 1e-12);
  EXPECT_EQ(zero.bound, 0.0);

  const GammaContinuity d = gamma_continuity_bound(Matrix::diagonal({1, 0}), Matrix::diagonal({0.5, 0}), tol);
  EXPECT_NEAR(d.measured, 0.5, kTight);
  EXPECT_NEAR(d.beta, 3.0, 1e-12);
  EXPECT_NEAR(d.bound, 1.5, 1e-12);

  double previous_measured = INFINITY, previous_bound = INFINITY;
  for (int n = 1; n <= 10; ++n) {
    const GammaContinuity g = gamma_continuity_bound(t, (0.5 / n) * t, tol);
    EXPECT_LE(g.measured, previous_measured + 1e-12);
    EXPECT_LE(g.bound, previous_bound + 1e-12);
    EXPECT_LE(g.measured / g.bound, 1.0 + 1e-12);
    previous_measured = g.measured;
    previous_bound = g.bound;
  }
  EXPECT_THROW(gamma_continuity_bound(Matrix::diagonal({1, 0}), Matrix::diagonal({0, 1}), tol), HypothesisRefusal);
}

TEST(DingHuang, Examples) {
  const Tolerances tol;
  const Matrix t = random_operator({3, 3, 3, 0.5, 1.0, 2});
  for (DingHuangCase c : {DingHuangCase::injective, DingHuangCase::surjective, DingHuangCase::general}) {
    const DingHuangBounds b = norm_bounds_ding_huang(t, Matrix(3, 3), c, tol);
    EXPECT_NEAR(b.bound_norm, spectral_norm(pinv(t, tol)), 1e-12) << to_string(c);
  }

  const DingHuangBounds inj = norm_bounds_ding_huang(Matrix{{1}, {0}}, Matrix{{0.4}, {0}}, DingHuangCase::injective, tol);
  EXPECT_NEAR(inj.norm_pinv_sum, 1 / 1.4, kTight);
  EXPECT_NEAR(inj.bound_norm, 5.0 / 3.0, kTight);

  const DingHuangBounds gen =
      norm_bounds_ding_huang(Matrix::diagonal({1, 0}), Matrix::diagonal({0.3, 0}), DingHuangCase::general, tol);
  EXPECT_NEAR(gen.norm_pinv_sum, 1 / 1.3, kTight);
  EXPECT_NEAR(gen.bound_norm, 1 / 0.7, kTight);

  EXPECT_THROW(norm_bounds_ding_huang(Matrix::diagonal({1, 0}), Matrix(2, 2), DingHuangCase::injective, tol),
               HypothesisRefusal);
  EXPECT_THROW(norm_bounds_ding_huang(Matrix::diagonal({1, 0}), Matrix(2, 2), DingHuangCase::surjective, tol),
               HypothesisRefusal);
  EXPECT_THROW(norm_bounds_ding_huang(Matrix::diagonal({1, 0}), Matrix::diagonal({0, 1}), DingHuangCase::general, tol),
               HypothesisRefusal);
}

TEST(DingHuang, BoundsHoldOnRandomPairs) {
  const Tolerances tol;
  Rng rng(10);
  for (int trial = 0; trial < 40; ++trial) {
    const Matrix inj = random_operator({6, 4, 4, 0.5, 1.5, rng()});
    // T†T = I for injective T, so ‖T†(TK)‖ = ‖K‖ ≤ 0.8.
    const Matrix s_inj = inj * (0.8 * random_contraction(4, rng));
    EXPECT_NO_THROW(norm_bounds_ding_huang(inj, s_inj, DingHuangCase::injective, tol));

    const Matrix sur = random_operator({4, 6, 4, 0.5, 1.5, rng()});
    const Matrix s_sur = random_relative_perturbation(sur, 0.8, rng());
    EXPECT_NO_THROW(norm_bounds_ding_huang(sur, s_sur, DingHuangCase::surjective, tol));

    const Matrix gen = random_operator({5, 5, 3, 0.5, 1.5, rng()});
    const Matrix s_gen = s_alpha(gen, 0.9 / spectral_norm(pinv(gen, tol)), tol);
    EXPECT_NO_THROW(norm_bounds_ding_huang(gen, s_gen, DingHuangCase::general, tol));
  }
}

TEST(SurjectiveUpdate, RightFormMatchesOracleWhereSwappedFormIsIllFormed) {
  // For a wide T, T†(I+T†S)⁻¹ would multiply a cols×rows matrix by a
  // cols×cols one; only T†(I+ST†)⁻¹ is well-formed.
  const Tolerances tol;
  const Matrix t = random_operator({2, 4, 2, 0.5, 1.0, 3});
  const Matrix s = random_relative_perturbation(t, 0.5, 4);
  const Matrix td = pinv(t, tol);
  const Matrix swapped_inner = inverse(Matrix::identity(4) + td * s, tol);
  EXPECT_THROW(td * swapped_inner, DimensionError);
  const UpdateResult r = update_relative_surjective(t, s, 0.5, 0.0, tol);
  EXPECT_LE(spectral_norm(r.pinv_updated - oracle::qr_pinv(t + s, 1e-10)), 1e-9);
}
