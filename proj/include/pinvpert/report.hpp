#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "pinvpert/hypothesis.hpp"
#include "pinvpert/matrix.hpp"
#include "pinvpert/pinv.hpp"
#include "pinvpert/reverse_order.hpp"
#include "pinvpert/update.hpp"

namespace pinvpert {

using Json = nlohmann::json;

/// Result record of one CLI command.
struct Report {
  std::string command;
  Json inputs = Json::object();
  Json verdicts = Json::object();
  std::map<std::string, double> timings;  ///< wall-clock milliseconds per phase
  Tolerances tolerances_used;

  friend bool operator==(const Report&, const Report&) = default;
};

/// Non-finite values have no JSON spelling; they are stored as null.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json number(const std::optional<double>& v) { return v ? number(*v) : Json(nullptr); }

inline Json to_json(const Tolerances& t) {
  return {{"rank_rel", t.rank_rel}, {"eq_abs", t.eq_abs}, {"eq_rel", t.eq_rel}, {"margin_strict", t.margin_strict}};
}

inline Tolerances tolerances_from_json(const Json& j) {
  Tolerances t;
  t.rank_rel = j.at("rank_rel").get<double>();
  t.eq_abs = j.at("eq_abs").get<double>();
  t.eq_rel = j.at("eq_rel").get<double>();
  t.margin_strict = j.at("margin_strict").get<double>();
  return t;
}

inline Json to_json(const AxiomReport& a) {
  return {{"residual_tTt", number(a.residual_tTt)},   {"residual_tdTtd", number(a.residual_tdTtd)},
          {"residual_sym1", number(a.residual_sym1)}, {"residual_sym2", number(a.residual_sym2)},
          {"passed", a.passed}};
}

inline Json to_json(const HypothesisReport& h) {
  return {{"norm_TdS", number(h.norm_TdS)},
          {"norm_STd", number(h.norm_STd)},
          {"norm_S", number(h.norm_S)},
          {"norm_Td", number(h.norm_Td)},
          {"gamma_T", number(h.gamma_T)},
          {"range_incl_residual", number(h.range_incl_residual)},
          {"null_incl_residual", number(h.null_incl_residual)},
          {"ttds_residual", number(h.ttds_residual)},
          {"stdt_residual", number(h.stdt_residual)},
          {"range_inclusion", h.range_inclusion},
          {"null_inclusion", h.null_inclusion},
          {"lambda1_min", number(h.lambda1_min)},
          {"verdict_stewart", h.verdict_stewart},
          {"verdict_norm_gamma", h.verdict_norm_gamma},
          {"verdict_relative", h.verdict_relative}};
}

inline Json to_json(const UpdateResult& u) {
  return {{"method", std::string(to_string(u.method))},
          {"bound_apriori", number(u.bound_apriori)},
          {"oracle_discrepancy", number(u.oracle_discrepancy)},
          {"form_discrepancy", number(u.form_discrepancy)},
          {"norms_used",
           {{"norm_TdS", number(u.norms_used.norm_TdS)},
            {"norm_STd", number(u.norms_used.norm_STd)},
            {"norm_S", number(u.norms_used.norm_S)},
            {"norm_Td", number(u.norms_used.norm_Td)}}},
          {"rows", u.pinv_updated.rows()},
          {"cols", u.pinv_updated.cols()}};
}

inline Json to_json(const NeumannResult& n) {
  return {{"method", "neumann_series"},
          {"terms_used", n.terms_used},
          {"last_term_norm", number(n.last_term_norm)},
          {"ratio", number(n.ratio)},
          {"residual_bound", number(n.residual_bound)},
          {"converged", n.converged},
          {"eps_series", number(n.eps_series)},
          {"oracle_discrepancy", number(n.oracle_discrepancy)},
          {"closed_form_discrepancy", number(n.closed_form_discrepancy)}};
}

inline Json to_json(const FactoredPinv& f) {
  return {{"max_pairwise_discrepancy", number(f.max_pairwise_discrepancy)},
          {"rows", f.pinv_oracle.rows()},
          {"cols", f.pinv_oracle.cols()}};
}

inline Json to_json(const GammaContinuity& g) {
  return {{"measured", number(g.measured)}, {"bound", number(g.bound)}, {"beta", number(g.beta)}};
}

inline Json to_json(const DingHuangBounds& b) {
  return {{"case", std::string(to_string(b.which))},
          {"norm_pinv_sum", number(b.norm_pinv_sum)},
          {"bound_norm", number(b.bound_norm)},
          {"measured_diff", number(b.measured_diff)},
          {"bound_diff", number(b.bound_diff)}};
}

namespace detail {

inline void dump_json(const Json& j, std::string& out, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad + Json(it.key()).dump() + (indent > 0 ? ": " : ":");
        dump_json(it.value(), out, indent, depth + 1);
      }
      out += nl + close_pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) {
          out += ",";
          out += nl;
        }
        out += pad;
        dump_json(j[i], out, indent, depth + 1);
      }
      out += nl + close_pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.16e", v);  // 17 significant digits
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// JSON text in which every floating value carries 17 significant digits.
inline std::string dump_json(const Json& j, int indent = 2) {
  std::string out;
  detail::dump_json(j, out, indent, 0);
  return out;
}

inline Json to_json(const Report& r) {
  return {{"command", r.command},
          {"inputs", r.inputs},
          {"verdicts", r.verdicts},
          {"timings", r.timings},
          {"tolerances_used", to_json(r.tolerances_used)}};
}

inline std::string serialize(const Report& r, int indent = 2) { return dump_json(to_json(r), indent); }

inline Report parse_report(const std::string& text) {
  const Json j = Json::parse(text);
  Report r;
  r.command = j.at("command").get<std::string>();
  r.inputs = j.at("inputs");
  r.verdicts = j.at("verdicts");
  r.timings = j.at("timings").get<std::map<std::string, double>>();
  r.tolerances_used = tolerances_from_json(j.at("tolerances_used"));
  return r;
}

/// Accumulates wall-clock time for named phases into a Report.
class PhaseTimer {
public:
  explicit PhaseTimer(Report& report) : report_(report) {}

  template <typename F>
  decltype(auto) time(const std::string& phase, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    struct Record {
      Report& r;
      const std::string& phase;
      std::chrono::steady_clock::time_point start;
      ~Record() {
        r.timings[phase] += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      }
    } record{report_, phase, start};
    return f();
  }

private:
  Report& report_;
};

}  // namespace pinvpert
