#pragma once

#include <json.hpp>

#include "crosscheck.hpp"
#include "flow.hpp"

namespace reachlab {

using Json = nlohmann::ordered_json;

inline constexpr int report_format_version = 1;

namespace report {

inline Json point(const Point& p, int dim) {
  Json a = Json::array();
  for (int i = 0; i < dim; ++i) a.push_back(p[i]);
  return a;
}

// NaN and infinities have no JSON spelling; they are written as null.
inline Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Json of(const SteinerFit& f) {
  Json samples = Json::array();
  for (auto& [s, v] : f.samples) samples.push_back({s, v});
  return {{"n", f.n},
          {"coeffs", f.coeffs},
          {"quermass", f.quermass},
          {"s_lo", f.s_lo},
          {"s_hi", f.s_hi},
          {"rms_residual", f.rms_residual},
          {"max_residual", f.max_residual},
          {"worst_offset", f.worst_offset},
          {"degenerate_offsets", f.degenerate_offsets},
          {"samples", samples}};
}

inline Json of(const ReachEstimate& e, int dim) {
  Json j{{"value", number(e.value)}, {"method", to_string(e.method)}, {"lo", number(e.lo)}, {"hi", number(e.hi)}};
  if (e.witness) {
    const auto& w = *e.witness;
    if (w.offsets)
      j["witness"] = {{"kind", "offsets"},
                      {"s", w.s},
                      {"t", w.t},
                      {"location", point(w.location, dim)},
                      {"discrepancy", w.discrepancy}};
    else
      j["witness"] = {{"kind", "pair"}, {"a", w.a}, {"b", w.b}, {"pa", point(w.pa, dim)}, {"pb", point(w.pb, dim)}};
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

inline Json of(const RoundtripResult& r, int dim) {
  return {{"holds", r.holds},
          {"discrepancy", r.discrepancy},
          {"slack_volume", r.slack_volume},
          {"tolerance", r.tolerance},
          {"location", point(r.location, dim)}};
}

inline Json of(const RegularityReport& r) {
  Json ladder = Json::array();
  for (const auto& l : r.ladder) ladder.push_back({{"step", l.step}, {"ratio", l.ratio}});
  return {{"alpha", r.alpha},
          {"C_hat", r.C_hat},
          {"divergence_trend", r.divergence_trend},
          {"verdict", to_string(r.verdict)},
          {"worst_x", r.worst_x},
          {"worst_step", r.worst_step},
          {"directions", r.directions},
          {"ladder", ladder}};
}

inline Json of(const RegularityCrosscheck& rc, int dim) {
  Json probes = Json::array();
  for (const auto& p : rc.probes) {
    Json j{{"index", p.index},
           {"point", point(p.point, dim)},
           {"flagged", p.flagged},
           {"window", p.window},
           {"skipped", p.skipped}};
    if (!p.skipped) {
      j["lipschitz"] = p.lipschitz;
      j["scan"] = of(p.report);
    }
    probes.push_back(j);
  }
  return {{"max_C_hat", rc.max_C_hat},
          {"reach", of(rc.reach, dim)},
          {"c", rc.c},
          {"bound", number(rc.bound)},
          {"bound_ok", rc.bound_ok},
          {"regular", rc.regular},
          {"reach_positive", rc.reach_positive},
          {"consistent", rc.consistent},
          {"agree", rc.agree},
          {"probes", probes}};
}

inline Json of(const DiscreteCurvature& dc) {
  auto w = quermass_from_curvature(dc);
  Json j{{"dim", dc.dim},
         {"boundary_measure", dc.boundary_measure},
         {"enclosed_volume", dc.enclosed_volume},
         {"quermass", w},
         {"total_gauss_curvature", total_gauss_curvature(dc)},
         {"chi_estimate", chi_from_curvature(dc)}};
  if (dc.dim == 2)
    j["vertices"] = dc.turning.size();
  else
    j["edges"] = dc.edges.size();
  return j;
}

inline Json of(const TheoremCrosscheck& x, int dim) {
  Json verdicts = Json::array();
  for (const auto& v : x.verdicts)
    verdicts.push_back({{"name", v.name},
                        {"group", v.group},
                        {"positive", v.positive},
                        {"value", number(v.value)},
                        {"threshold", v.threshold},
                        {"witness", v.witness}});
  Json j{{"r", x.r},
         {"spacing", x.spacing},
         {"classification", x.classification},
         {"unanimous", x.unanimous},
         {"disagreements", x.disagreements},
         {"verdicts", verdicts},
         {"alternating_fit", of(x.alternating.fit)},
         {"alternating_tau", x.alternating.tau},
         {"outer_fit", of(x.outer_fit)},
         {"boundary_reach", of(x.boundary_reach, dim)},
         {"set_reach", of(x.set_reach, dim)}};
  j["roundtrip"] = x.roundtrip ? of(*x.roundtrip, dim) : Json(nullptr);
  j["regularity"] = x.regularity ? of(*x.regularity, dim) : Json(nullptr);
  return j;
}

//! One record per trace time, then a terminal record.
inline std::vector<Json> trace_records(const FlowTrace& tr) {
  std::vector<Json> out;
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    Json r{{"t", tr.times[k]},
           {"W", tr.W_values[k]},
           {"W_source", tr.W_source[k]},
           {"d_H_step", k < tr.hausdorff_steps.size() ? number(tr.hausdorff_steps[k]) : Json(nullptr)},
           {"volume", tr.volumes[k]}};
    out.push_back(r);
  }
  Json term{{"terminal_class", to_string(tr.terminal_class)},
            {"T", tr.T},
            {"terminal_inradius", tr.terminal_inradius},
            {"terminal_volume", volume(tr.terminal)}};
  term["terminal_reach"] = tr.terminal_reach ? Json(*tr.terminal_reach) : Json(nullptr);
  out.push_back(term);
  return out;
}

inline Json of(const FlowTrace& tr, const EdeCheck& ede) {
  const double omega = unit_ball_volume(tr.n);
  double worst_step = 0.0;
  for (double s : tr.hausdorff_steps) worst_step = std::max(worst_step, std::abs(s / (omega * tr.dt) - 1.0));
  Json records = Json::array();
  for (auto& r : trace_records(tr)) records.push_back(r);
  return {{"n", tr.n},
          {"spacing", tr.spacing},
          {"reach", tr.reach},
          {"T", tr.T},
          {"dt", tr.dt},
          {"steps", tr.times.size()},
          {"terminal_class", to_string(tr.terminal_class)},
          {"ede_residual", ede.max_residual},
          {"ede_relative", tr.W_values.empty() ? 0.0 : ede.max_residual / tr.W_values.front()},
          {"ede_worst_pair", {ede.worst_s, ede.worst_t}},
          {"metric_derivative_worst_relative", worst_step},
          {"trace", records}};
}

inline Json of(const SlopeSample& s) {
  return {{"i", s.i},
          {"t_probe", s.t_probe},
          {"slope_value", s.slope_value},
          {"formula_value", s.formula_value},
          {"relative_error", s.formula_value != 0.0 ? s.slope_value / s.formula_value - 1.0 : 0.0},
          {"base", s.base},
          {"quotient_t", s.quotient_t},
          {"quotient_half", s.quotient_half},
          {"ladder_slope", s.ladder_slope},
          {"raw_richardson", s.raw_richardson}};
}

inline Json of(const GroundTruth& t) {
  Json branches = Json::array();
  for (const auto& b : t.steiner) branches.push_back({{"coeffs", b.coeffs}, {"lo", number(b.lo)}, {"hi", number(b.hi)}});
  Json j{{"dim", t.dim}, {"steiner", branches}, {"euler_char", t.euler_char}};
  j["reach_of_set"] = t.reach_of_set ? number(*t.reach_of_set) : Json(nullptr);
  j["reach_of_boundary"] = t.reach_of_boundary ? number(*t.reach_of_boundary) : Json(nullptr);
  j["quermass"] = t.quermass ? Json(*t.quermass) : Json(nullptr);
  return j;
}

//! The report document: format tag and version, the full config, then the
//! command's result.
inline Json envelope(const std::string& command, const Json& config, const Json& result) {
  return {{"format", "reachlab-report"},
          {"format_version", report_format_version},
          {"command", command},
          {"config", config},
          {"result", result}};
}

inline std::string csv_cell(const Json& v) {
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  return v.dump();
}

inline void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& rows) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), rows);
  } else if (j.is_array()) {
    if (j.empty()) rows.emplace_back(prefix, "");
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), rows);
  } else {
    rows.emplace_back(prefix, csv_cell(j));
  }
}

//! key,value rows with dotted paths; arrays are indexed.
inline std::string to_csv(const Json& doc) {
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(doc, "", rows);
  std::string out = "key,value\n";
  for (auto& [k, v] : rows) out += k + "," + v + "\n";
  return out;
}

//! Trace as a plain table for plotting.
inline std::string trace_csv(const FlowTrace& tr) {
  std::string out = "t,W,d_H_step,volume\n";
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    out += format_double(tr.times[k]) + "," + format_double(tr.W_values[k]) + ",";
    if (k < tr.hausdorff_steps.size()) out += format_double(tr.hausdorff_steps[k]);
    out += "," + format_double(tr.volumes[k]) + "\n";
  }
  return out;
}

} // namespace report
} // namespace reachlab
