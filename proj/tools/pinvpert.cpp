// pinvpert: command-line front end for the pseudoinverse perturbation toolkit.
//
// Exit codes: 0 success / all invariants hold, 1 hypothesis refusal or
// verification failure, 2 usage or I/O error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pinvpert/pinvpert.hpp"

namespace {

using namespace pinvpert;

constexpr int kOk = 0;
constexpr int kRefused = 1;
constexpr int kUsage = 2;

struct GlobalFlags {
  Tolerances tol;
  bool json = false;
  std::uint64_t seed = 42;
};

MatrixMarketFormat parse_format(const std::string& s) {
  return s == "coordinate" ? MatrixMarketFormat::coordinate : MatrixMarketFormat::array;
}

void emit(const Report& r, const GlobalFlags& g, const std::string& text) {
  if (g.json) {
    std::cout << serialize(r) << '\n';
  } else {
    std::cout << text;
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

Report make_report(const std::string& command, const GlobalFlags& g) {
  Report r;
  r.command = command;
  r.tolerances_used = g.tol;
  return r;
}

// ---------------------------------------------------------------------------

int cmd_pinv(const GlobalFlags& g, const std::string& t_path, const std::string& out) {
  Report r = make_report("pinv", g);
  r.inputs = {{"T", t_path}};
  PhaseTimer timer(r);
  const Matrix t = timer.time("read", [&] { return read_matrix(t_path); });
  const PinvResult p = timer.time("pseudoinverse", [&] { return pseudoinverse(t, g.tol); });
  const AxiomReport a = timer.time("axioms", [&] { return verify_mp_axioms(t, p.pinv, g.tol); });
  if (!out.empty()) timer.time("write", [&] { write_matrix(p.pinv, out); });

  Json sigma = Json::array();
  for (double s : p.sigma) sigma.push_back(number(s));
  r.verdicts = {{"rank", p.rank},
                {"gamma", number(p.gamma)},
                {"norm_pinv", number(spectral_norm(p.pinv))},
                {"sigma", sigma},
                {"axioms", to_json(a)}};
  emit(r, g,
       "rank " + std::to_string(p.rank) + "\ngamma " + fmt(p.gamma) + "\naxioms " + (a.passed ? "passed" : "FAILED") +
           " (residuals " + fmt(a.residual_tTt) + ", " + fmt(a.residual_tdTtd) + ", " + fmt(a.residual_sym1) + ", " +
           fmt(a.residual_sym2) + ")\n");
  return a.passed ? kOk : kRefused;
}

int cmd_check(const GlobalFlags& g, const std::string& t_path, const std::string& s_path, const std::string& require) {
  Report r = make_report("check", g);
  r.inputs = {{"T", t_path}, {"S", s_path}, {"require", require}};
  PhaseTimer timer(r);
  const Matrix t = timer.time("read", [&] { return read_matrix(t_path); });
  const Matrix s = timer.time("read", [&] { return read_matrix(s_path); });
  const HypothesisReport h = timer.time("check", [&] { return check_stewart_hypotheses(t, s, g.tol); });
  r.verdicts = to_json(h);

  bool ok = h.verdict_stewart;
  if (require == "norm-gamma") ok = h.verdict_norm_gamma;
  if (require == "relative") ok = h.verdict_relative;
  if (require == "any") ok = h.verdict_stewart || h.verdict_norm_gamma || h.verdict_relative;

  std::string text = "‖T†S‖ " + fmt(h.norm_TdS) + "\n‖ST†‖ " + fmt(h.norm_STd) + "\n‖S‖ " + fmt(h.norm_S) +
                     "\nγ(T) " + fmt(h.gamma_T) + "\nR(S) ⊆ R(T) " + yes_no(h.range_inclusion) + " (residual " +
                     fmt(h.range_incl_residual) + ")\nN(T) ⊆ N(S) " + yes_no(h.null_inclusion) + " (residual " +
                     fmt(h.null_incl_residual) + ")\nλ₁ (λ₂ = 0) " +
                     (h.lambda1_min ? fmt(*h.lambda1_min) : std::string("none")) +
                     "\nverdict_stewart " + yes_no(h.verdict_stewart) + "\nverdict_norm_gamma " +
                     yes_no(h.verdict_norm_gamma) + "\nverdict_relative " + yes_no(h.verdict_relative) + "\n";
  if (!h.verdict_stewart) text += "stewart: " + h.stewart_failure() + "\n";
  emit(r, g, text);
  return ok ? kOk : kRefused;
}

struct UpdateArgs {
  std::string method = "stewart";
  std::optional<double> lambda1;
  double lambda2 = 0.0;
  std::size_t samples = 1000;
  std::optional<double> eps;
  std::size_t max_terms = 10'000;
  std::string out;
};

int cmd_update(const GlobalFlags& g, const std::string& t_path, const std::string& s_path, const UpdateArgs& a) {
  Report r = make_report("update", g);
  r.inputs = {{"T", t_path}, {"S", s_path}, {"method", a.method}};
  PhaseTimer timer(r);
  const Matrix t = timer.time("read", [&] { return read_matrix(t_path); });
  const Matrix s = timer.time("read", [&] { return read_matrix(s_path); });

  Matrix result;
  double discrepancy_value = 0.0;
  double allowed = 0.0;
  std::string text;
  if (a.method == "neumann") {
    NeumannOptions opts;
    opts.eps_series = a.eps;
    opts.max_terms = a.max_terms;
    const NeumannResult n = timer.time("update", [&] { return neumann_pinv(t, s, opts, g.tol); });
    r.inputs["max_terms"] = a.max_terms;
    r.verdicts = to_json(n);
    result = n.pinv_s;
    discrepancy_value = n.oracle_discrepancy;
    allowed = n.residual_bound + g.tol.slack(spectral_norm(pinv(t, g.tol)) / (1.0 - n.ratio));
    text = "terms " + std::to_string(n.terms_used) + "\nratio " + fmt(n.ratio) + "\nresidual bound " +
           fmt(n.residual_bound) + "\nconverged " + yes_no(n.converged) + "\n";
    if (!n.converged) {
      r.verdicts["certified"] = false;
      emit(r, g, text + "series did not reach eps_series within max_terms\n");
      return kRefused;
    }
  } else {
    UpdateResult u;
    if (a.method == "stewart") {
      u = timer.time("update", [&] { return update_stewart(t, s, g.tol); });
    } else if (a.method == "relative") {
      double l1 = 0.0;
      if (a.lambda1) {
        l1 = *a.lambda1;
      } else {
        const auto est = estimate_lambda1(t, s, g.tol);
        if (!est) throw HypothesisRefusal("N(T) ⊄ N(S): no finite λ₁");
        l1 = *est;
      }
      r.inputs["lambda1"] = l1;
      r.inputs["lambda2"] = a.lambda2;
      u = timer.time("update", [&] { return update_relative_surjective(t, s, l1, a.lambda2, g.tol, a.samples); });
    } else {
      throw CLI::ValidationError("--method", "unknown method " + a.method);
    }
    r.verdicts = to_json(u);
    result = u.pinv_updated;
    discrepancy_value = u.oracle_discrepancy;
    allowed = 1e-8 * std::max(1.0, u.norms_used.norm_Td);
    text = "method " + std::string(to_string(u.method)) + "\noracle discrepancy " + fmt(u.oracle_discrepancy) +
           "\na-priori bound " + (u.bound_apriori ? fmt(*u.bound_apriori) : std::string("none")) + "\n";
  }
  if (!a.out.empty()) timer.time("write", [&] { write_matrix(result, a.out); });
  const bool certified = discrepancy_value <= allowed;
  r.verdicts["certified"] = certified;
  emit(r, g, text + "certified " + yes_no(certified) + "\n");
  return certified ? kOk : kRefused;
}

int cmd_bounds(const GlobalFlags& g, const std::string& t_path, const std::string& s_path) {
  Report r = make_report("bounds", g);
  r.inputs = {{"T", t_path}, {"S", s_path}};
  PhaseTimer timer(r);
  const Matrix t = timer.time("read", [&] { return read_matrix(t_path); });
  const Matrix s = timer.time("read", [&] { return read_matrix(s_path); });

  const Matrix td = pinv(t, g.tol);
  const Matrix sum_pinv = pinv(t + s, g.tol);
  const double measured = discrepancy(sum_pinv, td);
  std::size_t applicable = 0;
  bool all_hold = true;
  std::string text = "‖(T+S)† − T†‖ " + fmt(measured) + "\n";

  auto record = [&](const std::string& name, auto&& compute) {
    try {
      Json v = timer.time(name, compute);
      ++applicable;
      all_hold = all_hold && v.at("holds").template get<bool>();
      text += name + ": " + (v.at("holds").template get<bool>() ? "holds" : "VIOLATED") + "\n";
      r.verdicts[name] = std::move(v);
    } catch (const HypothesisRefusal& e) {
      r.verdicts[name] = {{"applicable", false}, {"reason", e.condition()}};
      text += name + ": not applicable (" + e.condition() + ")\n";
    } catch (const InvariantViolation& e) {
      ++applicable;
      all_hold = false;
      r.verdicts[name] = {{"applicable", true}, {"holds", false}, {"violation", e.what()}};
      text += name + ": VIOLATED (" + e.what() + ")\n";
    }
  };

  const double slack = g.tol.slack(spectral_norm(td));
  record("stewart_error", [&] {
    const double b = error_bound_stewart(t, s, g.tol);
    return Json{{"applicable", true}, {"bound", number(b)}, {"measured", number(measured)}, {"holds", measured <= b + slack}};
  });
  record("lambda2_zero_error", [&] {
    const double b = error_bound_lambda2_zero(t, s, g.tol);
    return Json{{"applicable", true}, {"bound", number(b)}, {"measured", number(measured)}, {"holds", measured <= b + slack}};
  });
  record("gamma_continuity", [&] {
    Json j = to_json(gamma_continuity_bound(t, s, g.tol));
    j["applicable"] = true;
    j["holds"] = true;
    return j;
  });
  for (DingHuangCase c : {DingHuangCase::injective, DingHuangCase::surjective, DingHuangCase::general}) {
    record("ding_huang_" + std::string(to_string(c)), [&] {
      Json j = to_json(norm_bounds_ding_huang(t, s, c, g.tol));
      j["applicable"] = true;
      j["holds"] = true;
      return j;
    });
  }
  r.verdicts["measured_diff"] = number(measured);
  r.verdicts["applicable_count"] = applicable;
  emit(r, g, text);
  return applicable > 0 && all_hold ? kOk : kRefused;
}

int cmd_rol(const GlobalFlags& g, const std::string& f_path, const std::string& g_path, const std::string& out) {
  Report r = make_report("rol", g);
  r.inputs = {{"F", f_path}, {"G", g_path}};
  PhaseTimer timer(r);
  const Matrix f = timer.time("read", [&] { return read_matrix(f_path); });
  const Matrix gm = timer.time("read", [&] { return read_matrix(g_path); });
  const FactoredPinv fp = timer.time("reverse_order", [&] { return reverse_order_pinv(f, gm, g.tol); });
  if (!out.empty()) timer.time("write", [&] { write_matrix(fp.pinv_oracle, out); });
  r.verdicts = to_json(fp);
  emit(r, g, "max pairwise discrepancy " + fmt(fp.max_pairwise_discrepancy) + "\n");
  return kOk;
}

struct GenArgs {
  std::size_t rows = 3, cols = 3, rank = 3;
  double gamma = 1.0, norm = 1.0;
  double alpha = 0.5;
  double lambda1 = 0.5;
  std::string kind = "norm_violation";
  std::string input;
  std::string out, out_t, out_s;
  std::string format = "array";
};

int cmd_gen(const GlobalFlags& g, const std::string& what, const GenArgs& a) {
  Report r = make_report("gen " + what, g);
  r.inputs = {{"seed", g.seed}};
  const MatrixMarketFormat format = parse_format(a.format);
  if (what == "operator") {
    r.inputs.update({{"rows", a.rows}, {"cols", a.cols}, {"rank", a.rank}, {"gamma", a.gamma}, {"norm", a.norm}});
    write_matrix(random_operator({a.rows, a.cols, a.rank, a.gamma, a.norm, g.seed}), a.out, format);
  } else if (what == "salpha") {
    r.inputs.update({{"T", a.input}, {"alpha", a.alpha}});
    write_matrix(s_alpha(read_matrix(a.input), a.alpha, g.tol), a.out, format);
  } else if (what == "relperturb") {
    r.inputs.update({{"T", a.input}, {"lambda1", a.lambda1}});
    write_matrix(random_relative_perturbation(read_matrix(a.input), a.lambda1, g.seed), a.out, format);
  } else {
    AdversarialKind kind = AdversarialKind::norm_violation;
    if (a.kind == "range_violation") kind = AdversarialKind::range_violation;
    if (a.kind == "null_violation") kind = AdversarialKind::null_violation;
    r.inputs["kind"] = std::string(to_string(kind));
    const auto [t, s] = adversarial_pair(kind, g.seed);
    write_matrix(t, a.out_t, format);
    write_matrix(s, a.out_s, format);
  }
  r.verdicts = {{"written", true}};
  emit(r, g, "written\n");
  return kOk;
}

int cmd_verify(const GlobalFlags& g, VerifyOptions o) {
  Report r = make_report("verify", g);
  o.seed = g.seed;
  o.tol = g.tol;
  r.inputs = {{"trials", o.trials}, {"seed", o.seed}, {"max_dim", o.max_dim}};
  PhaseTimer timer(r);
  const VerifySummary s = timer.time("verify", [&] { return run_verification(o); });
  r.verdicts = {{"invariants", to_json(s)}, {"passed", s.passed()}};
  std::string text;
  for (const auto& [name, t] : s.invariants) {
    text += (t.failures ? "FAIL " : "ok   ") + name + " (" + std::to_string(t.trials) + " trials, worst ratio " +
            fmt(t.worst) + ")" + (t.failures ? " " + t.first_failure : std::string()) + "\n";
  }
  emit(r, g, text + (s.passed() ? "all invariants hold\n" : "verification FAILED\n"));
  return s.passed() ? kOk : kRefused;
}

int report_error(const GlobalFlags& g, int code, const std::string& kind, const std::string& message) {
  if (g.json) {
    const Json j = {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
    std::cout << dump_json(j) << '\n';
  } else {
    std::cerr << "pinvpert: " << message << '\n';
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moore-Penrose pseudoinverse perturbation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--tol-abs", g.tol.eq_abs, "absolute equality tolerance")->envname("PINVPERT_TOL_ABS");
  app.add_option("--tol-rel", g.tol.eq_rel, "relative equality tolerance")->envname("PINVPERT_TOL_REL");
  app.add_option("--rank-rel", g.tol.rank_rel, "relative rank cutoff factor")->envname("PINVPERT_RANK_REL");
  app.add_option("--margin", g.tol.margin_strict, "margin for strict inequalities")->envname("PINVPERT_MARGIN");
  app.add_flag("--json", g.json, "emit a JSON report on stdout");
  app.add_option("--seed", g.seed, "random seed")->envname("PINVPERT_SEED");

  std::string p1, p2, out;
  auto* pinv_cmd = app.add_subcommand("pinv", "pseudoinverse, γ and Penrose-equation residuals");
  pinv_cmd->add_option("T", p1)->required();
  pinv_cmd->add_option("--out", out, "write T† as Matrix Market");

  std::string require = "stewart";
  auto* check_cmd = app.add_subcommand("check", "perturbation hypothesis report for (T, S)");
  check_cmd->add_option("T", p1)->required();
  check_cmd->add_option("S", p2)->required();
  check_cmd->add_option("--require", require, "verdict that decides the exit code")
      ->check(CLI::IsMember({"stewart", "norm-gamma", "relative", "any"}));

  UpdateArgs ua;
  auto* update_cmd = app.add_subcommand("update", "closed-form (T+S)† or Neumann-series S†");
  update_cmd->add_option("T", p1)->required();
  update_cmd->add_option("S", p2)->required();
  update_cmd->add_option("--method", ua.method)->check(CLI::IsMember({"stewart", "relative", "neumann"}));
  update_cmd->add_option("--lambda1", ua.lambda1, "relative bound λ₁ (default: minimal λ₁ with λ₂ = 0)");
  update_cmd->add_option("--lambda2", ua.lambda2, "relative bound λ₂");
  update_cmd->add_option("--samples", ua.samples, "random directions for the relative bound check");
  update_cmd->add_option("--eps", ua.eps, "Neumann term threshold (default 1e-12·‖T†‖)");
  update_cmd->add_option("--max-terms", ua.max_terms, "Neumann term cap");
  update_cmd->add_option("--out", ua.out, "write the result as Matrix Market");

  auto* bounds_cmd = app.add_subcommand("bounds", "a-priori bounds against the measured perturbation");
  bounds_cmd->add_option("T", p1)->required();
  bounds_cmd->add_option("S", p2)->required();

  auto* rol_cmd = app.add_subcommand("rol", "reverse-order law for A = FG");
  rol_cmd->add_option("F", p1)->required();
  rol_cmd->add_option("G", p2)->required();
  rol_cmd->add_option("--out", out, "write (FG)† as Matrix Market");

  GenArgs ga;
  auto* gen_cmd = app.add_subcommand("gen", "write generated fixtures");
  gen_cmd->require_subcommand(1);
  auto* gen_op = gen_cmd->add_subcommand("operator", "operator with prescribed rank, γ and norm");
  gen_op->add_option("--rows", ga.rows)->required();
  gen_op->add_option("--cols", ga.cols)->required();
  gen_op->add_option("--rank", ga.rank)->required();
  gen_op->add_option("--gamma", ga.gamma)->required();
  gen_op->add_option("--norm", ga.norm)->required();
  gen_op->add_option("--out", ga.out)->required();
  auto* gen_sa = gen_cmd->add_subcommand("salpha", "S_α = αT(I+T*T)⁻¹");
  gen_sa->add_option("T", ga.input)->required();
  gen_sa->add_option("--alpha", ga.alpha)->required();
  gen_sa->add_option("--out", ga.out)->required();
  auto* gen_rp = gen_cmd->add_subcommand("relperturb", "S = λ₁WT for a random contraction W");
  gen_rp->add_option("T", ga.input)->required();
  gen_rp->add_option("--lambda1", ga.lambda1)->required();
  gen_rp->add_option("--out", ga.out)->required();
  auto* gen_adv = gen_cmd->add_subcommand("adversarial", "(T, S) violating one Stewart hypothesis");
  gen_adv->add_option("--kind", ga.kind)->check(CLI::IsMember({"range_violation", "null_violation", "norm_violation"}));
  gen_adv->add_option("--out-t", ga.out_t)->required();
  gen_adv->add_option("--out-s", ga.out_s)->required();
  for (auto* sub : {gen_op, gen_sa, gen_rp, gen_adv}) {
    sub->add_option("--format", ga.format)->check(CLI::IsMember({"array", "coordinate"}));
  }

  VerifyOptions vo;
  auto* verify_cmd = app.add_subcommand("verify", "randomized invariant suite");
  verify_cmd->add_option("--trials", vo.trials);
  verify_cmd->add_option("--max-dim", vo.max_dim);
  verify_cmd->add_option("--jobs", vo.jobs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (g.json) return report_error(g, kUsage, "usage", e.what());
    app.exit(e);
    return kUsage;
  }

  try {
    g.tol.validate();
    if (*pinv_cmd) return cmd_pinv(g, p1, out);
    if (*check_cmd) return cmd_check(g, p1, p2, require);
    if (*update_cmd) return cmd_update(g, p1, p2, ua);
    if (*bounds_cmd) return cmd_bounds(g, p1, p2);
    if (*rol_cmd) return cmd_rol(g, p1, p2, out);
    if (*gen_cmd) {
      for (auto* sub : {gen_op, gen_sa, gen_rp, gen_adv}) {
        if (*sub) return cmd_gen(g, sub->get_name(), ga);
      }
    }
    if (*verify_cmd) return cmd_verify(g, vo);
  } catch (const MatrixMarketError& e) {
    return report_error(g, kUsage, std::string(MatrixMarketError::kind_name(e.kind())), e.what());
  } catch (const CLI::Error& e) {
    return report_error(g, kUsage, "usage", e.what());
  } catch (const HypothesisRefusal& e) {
    return report_error(g, kRefused, "hypothesis_refusal", e.what());
  } catch (const InvariantViolation& e) {
    return report_error(g, kRefused, "invariant_violation", e.what());
  } catch (const SingularMatrixError& e) {
    return report_error(g, kRefused, "singular", e.what());
  } catch (const ConvergenceError& e) {
    return report_error(g, kRefused, "convergence", e.what());
  } catch (const std::invalid_argument& e) {
    return report_error(g, kUsage, "invalid_argument", e.what());
  } catch (const std::exception& e) {
    return report_error(g, kUsage, "error", e.what());
  }
  return kUsage;
}
