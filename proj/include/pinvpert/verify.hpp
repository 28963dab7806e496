#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "pinvpert/decomposition.hpp"
#include "pinvpert/generators.hpp"
#include "pinvpert/hypothesis.hpp"
#include "pinvpert/matrix.hpp"
#include "pinvpert/pinv.hpp"
#include "pinvpert/random.hpp"
#include "pinvpert/report.hpp"
#include "pinvpert/reverse_order.hpp"
#include "pinvpert/update.hpp"

namespace pinvpert {

struct VerifyOptions {
  std::size_t trials = 100;
  std::uint64_t seed = 42;
  std::size_t max_dim = 12;
  std::size_t jobs = 1;
  Tolerances tol;
};

/// Per-invariant tally. `worst` is the largest measured/allowed ratio seen;
/// a trial fails when its ratio exceeds 1 or the computation throws.
struct InvariantTally {
  std::size_t trials = 0;
  std::size_t failures = 0;
  double worst = 0.0;
  std::string first_failure;
};

struct VerifySummary {
  std::map<std::string, InvariantTally> invariants;

  bool passed() const {
    return std::all_of(invariants.begin(), invariants.end(), [](const auto& kv) { return kv.second.failures == 0; });
  }
};

inline Json to_json(const VerifySummary& s) {
  Json j = Json::object();
  for (const auto& [name, t] : s.invariants) {
    j[name] = {{"trials", t.trials}, {"failures", t.failures}, {"worst_ratio", number(t.worst)},
               {"first_failure", t.first_failure}};
  }
  return j;
}

namespace detail {

struct Observation {
  std::string invariant;
  double ratio = 0.0;  ///< measured / allowed; > 1 is a failure
  std::string error;   ///< non-empty when the trial threw
};

class TrialLog {
public:
  explicit TrialLog(std::vector<Observation>& out) : out_(out) {}

  void ratio(const std::string& name, double measured, double allowed) {
    out_.push_back({name, allowed > 0 ? measured / allowed : (measured > 0 ? INFINITY : 0.0), {}});
  }
  void holds(const std::string& name, bool ok) { out_.push_back({name, ok ? 0.0 : 2.0, {}}); }
  void error(const std::string& name, const std::string& what) { out_.push_back({name, INFINITY, what}); }

  template <typename F>
  void guarded(const std::string& name, F&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      error(name, e.what());
    }
  }

private:
  std::vector<Observation>& out_;
};

inline std::size_t uniform_size(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline GenSpec random_spec(Rng& rng, std::size_t rows, std::size_t cols, std::size_t rank) {
  GenSpec g;
  g.rows = rows;
  g.cols = cols;
  g.rank = rank;
  g.norm_target = uniform(rng, 0.5, 4.0);
  g.gamma_target = rank == 1 ? g.norm_target : g.norm_target * uniform(rng, 0.1, 1.0);
  g.seed = rng();
  return g;
}

inline double rel_gap(const Matrix& a, const Matrix& b) {
  return discrepancy(a, b) / std::max({1.0, spectral_norm(a), spectral_norm(b)});
}

inline void run_trial(std::uint64_t seed, const VerifyOptions& o, std::vector<Observation>& out) {
  TrialLog log(out);
  const Tolerances& tol = o.tol;
  Rng rng(seed);
  const std::size_t d = std::max<std::size_t>(1, o.max_dim);

  // Penrose equations and pseudoinverse identities.
  log.guarded("mp_axioms", [&] {
    const std::size_t m = uniform_size(rng, 1, d), n = uniform_size(rng, 1, d);
    const Matrix t = random_operator(random_spec(rng, m, n, uniform_size(rng, 1, std::min(m, n))));
    const PinvResult p = pseudoinverse(t, tol);
    const AxiomReport a = verify_mp_axioms(t, p.pinv, tol);
    const double scale = 1e-9 * std::max({1.0, spectral_norm(t), spectral_norm(p.pinv)});
    log.ratio("mp_axioms", std::max({a.residual_tTt, a.residual_tdTtd, a.residual_sym1, a.residual_sym2}), scale);
    log.ratio("pinv_identities",
              std::max({rel_gap(pinv(p.pinv, tol), t), rel_gap(pinv(adjoint(t), tol), adjoint(p.pinv)),
                        rel_gap(pinv(adjoint(t) * t, tol), p.pinv * adjoint(p.pinv))}),
              1e-9);
    log.ratio("gamma_identity", std::abs(spectral_norm(p.pinv) * p.gamma - 1.0), 1e-10);
  });

  // Stewart update on S_α.
  log.guarded("stewart_update", [&] {
    const std::size_t m = uniform_size(rng, 1, d), n = uniform_size(rng, 1, d);
    const Matrix t = random_operator(random_spec(rng, m, n, uniform_size(rng, 1, std::min(m, n))));
    const double ntd = spectral_norm(pinv(t, tol));
    const Matrix s = s_alpha(t, uniform(rng, 0.01, 0.99) * 2.0 / ntd, tol);
    const UpdateResult u = update_stewart(t, s, tol);
    log.ratio("stewart_update", u.oracle_discrepancy, 1e-8 * ntd);
    log.ratio("stewart_left_right", u.form_discrepancy, 1e-9);
    log.holds("stewart_rank", numerical_rank(t + s, tol) == numerical_rank(t, tol));
    log.ratio("stewart_null_space", principal_angle_gap(null_space_basis(t + s, tol), null_space_basis(t, tol)), 1e-8);
    const double measured = discrepancy(u.pinv_updated, pinv(t, tol));
    log.ratio("stewart_error_bound", std::max(0.0, measured - *u.bound_apriori), 1e-10);
  });

  // Relative-bound update for surjective T.
  log.guarded("relative_update", [&] {
    const std::size_t m = uniform_size(rng, 1, d), n = uniform_size(rng, m, std::max(m, d));
    const Matrix t = random_operator(random_spec(rng, m, n, m));
    const double lambda1 = uniform(rng, 0.0, 0.9);
    const Matrix s = random_relative_perturbation(t, lambda1, rng());
    const UpdateResult u = update_relative_surjective(t, s, lambda1, 0.0, tol, 200);
    const double ntd = u.norms_used.norm_Td;
    log.ratio("relative_update", u.oracle_discrepancy, 1e-8 * ntd);
    const Matrix sum_pinv = pinv(t + s, tol);
    log.ratio("relative_norm_bound", std::max(0.0, spectral_norm(sum_pinv) - ntd / (1.0 - lambda1)), 1e-10);
    log.ratio("relative_error_bound", std::max(0.0, discrepancy(sum_pinv, pinv(t, tol)) - *u.bound_apriori), 1e-10);
    const double g_t = reduced_min_modulus(t, tol), g_sum = reduced_min_modulus(t + s, tol);
    log.ratio("relative_gamma_lower", std::max(0.0, (1.0 - lambda1) * g_t - g_sum), 1e-10);
  });

  // Neumann series for S near surjective T.
  log.guarded("neumann_series", [&] {
    const std::size_t m = uniform_size(rng, 1, d), n = uniform_size(rng, m, std::max(m, d));
    const Matrix t = random_operator(random_spec(rng, m, n, m));
    const double ratio = uniform(rng, 0.1, 0.9);
    Matrix w = random_contraction(m, rng);
    w *= 1.0 / spectral_norm(w);
    const Matrix s = t + ratio * (w * t);
    const Matrix sd = pinv(s, tol);
    double worst = 0.0;
    const double ntd = spectral_norm(pinv(t, tol));
    const NeumannResult r = neumann_pinv(t, s, {}, tol, [&](std::size_t k, const Matrix& partial) {
      const double bound = ntd * std::pow(ratio, static_cast<double>(k)) / (1.0 - ratio) + 1e-10;
      worst = std::max(worst, discrepancy(partial, sd) / bound);
    });
    log.ratio("neumann_tail_bound", worst, 1.0);
    const double cap = std::ceil(std::log(r.eps_series / ntd) / std::log(r.ratio)) + 2.0;
    log.ratio("neumann_terms", static_cast<double>(r.terms_used), cap);
  });

  // Reverse-order law.
  log.guarded("reverse_order", [&] {
    const std::size_t k = uniform_size(rng, 1, d);
    const std::size_t m = uniform_size(rng, k, std::max(k, d)), n = uniform_size(rng, k, std::max(k, d));
    const Matrix f = random_operator(random_spec(rng, m, k, k));
    const Matrix g = random_operator(random_spec(rng, k, n, k));
    log.ratio("reverse_order", reverse_order_pinv(f, g, tol).max_pairwise_discrepancy, 1e-9);
  });

  // Resolvent identities behind S_α.
  log.guarded("resolvent_identities", [&] {
    const std::size_t m = uniform_size(rng, 1, d), n = uniform_size(rng, 1, d);
    const Matrix t = random_operator(random_spec(rng, m, n, uniform_size(rng, 1, std::min(m, n))));
    const Matrix res = inverse(Matrix::identity(n) + adjoint(t) * t, tol);
    log.ratio("resolvent_identities", std::max(0.0, spectral_norm(t * res) - 0.5), 1e-12);
    log.ratio("commute_identity", commute_identity_check(t, tol), 1e-10);
  });
}

}  // namespace detail

/// Runs the randomized invariant suite. Each trial draws from its own seed
/// derived from the master seed, so the summary does not depend on `jobs`.
inline VerifySummary run_verification(const VerifyOptions& o) {
  std::vector<std::vector<detail::Observation>> per_trial(o.trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < o.trials; i = next++) detail::run_trial(derive_seed(o.seed, i), o, per_trial[i]);
  };
  const std::size_t jobs = std::clamp<std::size_t>(o.jobs, 1, std::max<std::size_t>(1, o.trials));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  VerifySummary s;
  for (std::size_t i = 0; i < per_trial.size(); ++i) {
    for (const auto& obs : per_trial[i]) {
      InvariantTally& t = s.invariants[obs.invariant];
      ++t.trials;
      const bool failed = !obs.error.empty() || !(obs.ratio <= 1.0);
      if (failed) {
        if (t.failures == 0) {
          t.first_failure = "trial " + std::to_string(i) + ": " +
                            (obs.error.empty() ? "ratio " + std::to_string(obs.ratio) : obs.error);
        }
        ++t.failures;
      }
      if (std::isfinite(obs.ratio)) t.worst = std::max(t.worst, obs.ratio);
    }
  }
  return s;
}

}  // namespace pinvpert
