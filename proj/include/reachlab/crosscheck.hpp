#pragma once

#include "regularity.hpp"
#include "reach.hpp"

namespace reachlab {

//! One verdict of the equivalence harness. Boundary-group verdicts should
//! all agree; the set-group ones are reported next to them.
struct CheckVerdict {
  std::string name;
  std::string group;  // "boundary" or "set"
  bool positive = false;
  double value = 0.0; // the quantity the verdict was read from
  double threshold = 0.0;
  std::string witness;
};

struct TheoremCrosscheck {
  double r = 0.0;
  double spacing = 0.0;
  AlternatingResult alternating;
  SteinerFit outer_fit;
  double outer_tau = 0.0;
  ReachEstimate boundary_reach;
  ReachEstimate set_reach;
  std::optional<RoundtripResult> roundtrip;
  std::optional<RegularityCrosscheck> regularity;
  std::vector<CheckVerdict> verdicts;
  bool unanimous = false;
  std::string classification; // positive, negative, outer-Steiner-only, disagreement
  std::vector<std::string> disagreements;
};

namespace detail {

inline std::string point_text(const Point& p, int dim) {
  std::string s = "(";
  for (int a = 0; a < dim; ++a) s += (a ? ", " : "") + format_double(p[a]);
  return s + ")";
}

inline std::string witness_text(const ReachEstimate& e, int dim) {
  if (!e.witness) return "";
  const auto& w = *e.witness;
  if (w.offsets)
    return "s=" + format_double(w.s) + " t=" + format_double(w.t) + " at " + point_text(w.location, dim);
  return "pair " + std::to_string(w.a) + "," + std::to_string(w.b);
}

} // namespace detail

//! Runs alternating_fit, boundary and set reach_semigroup, convex_roundtrip
//! (convex grids) and regularity_reach_crosscheck (when a boundary sample is
//! given) at radius r and compares their verdicts.
inline TheoremCrosscheck theorem_crosscheck(const BinaryGrid& g, double r, const PointedSample* curve = nullptr) {
  validate(g);
  require_nontrivial(g, "theorem_crosscheck");
  const auto f = distance_transform(g);
  const double h = g.geom.spacing;
  const int n = g.geom.dim;
  r = snap_to_lattice(r, h);
  TheoremCrosscheck out;
  out.r = r;
  out.spacing = h;
  const double tol = h; // lattice tolerance on reach comparisons

  out.alternating = alternating_fit(f, r);
  out.verdicts.push_back({"alternating_fit", "boundary", out.alternating.holds, out.alternating.fit.max_residual,
                          out.alternating.tau,
                          "worst u=" + format_double(out.alternating.worst_offset) +
                              " base s=" + format_double(out.alternating.worst_base)});

  const double scan = std::min(r + 2.0 * h, boundary_scan_limit(f));
  out.boundary_reach = reach_semigroup(f, scan, ReachTarget::boundary);
  out.verdicts.push_back({"reach_boundary", "boundary", out.boundary_reach.value >= r - tol, out.boundary_reach.value,
                          r - tol, detail::witness_text(out.boundary_reach, n)});

  if (is_digitally_convex(g) && r < inradius(f)) {
    out.roundtrip = convex_roundtrip(f, r);
    out.verdicts.push_back({"convex_roundtrip", "boundary", out.roundtrip->holds, out.roundtrip->slack_volume,
                            out.roundtrip->tolerance, "at " + detail::point_text(out.roundtrip->location, n)});
  }

  if (curve) {
    out.regularity = regularity_reach_crosscheck(*curve);
    const auto& rc = *out.regularity;
    std::string where;
    for (const auto& p : rc.probes)
      if (!p.skipped && p.report.verdict == Verdict::inconsistent) {
        where = "inconsistent probe " + std::to_string(p.index) + " at " + detail::point_text(p.point, curve->dim);
        break;
      }
    out.verdicts.push_back({"regularity", "boundary", rc.regular && rc.reach.value >= r - tol, rc.reach.value, r - tol,
                            where});
  }

  const double sset = std::min(r, outer_margin(f) - 2.0 * h);
  out.set_reach = reach_semigroup(f, snap_to_lattice(sset, h), ReachTarget::set);
  out.verdicts.push_back({"reach_set", "set", out.set_reach.value >= r - tol, out.set_reach.value, r - tol,
                          detail::witness_text(out.set_reach, n)});

  out.outer_fit = fit_outer(f, r);
  out.outer_tau = out.alternating.tau;
  out.verdicts.push_back({"outer_fit", "set", out.outer_fit.max_residual <= out.outer_tau, out.outer_fit.max_residual,
                          out.outer_tau, "worst s=" + format_double(out.outer_fit.worst_offset)});

  const CheckVerdict* first = nullptr;
  out.unanimous = true;
  for (const auto& v : out.verdicts) {
    if (v.group != "boundary") continue;
    if (!first) {
      first = &v;
      continue;
    }
    if (v.positive != first->positive) {
      out.unanimous = false;
      out.disagreements.push_back(first->name + " (" + (first->positive ? "positive" : "negative") + "; " +
                                  first->witness + ") vs " + v.name + " (" + (v.positive ? "positive" : "negative") +
                                  "; " + v.witness + ")");
    }
  }
  auto verdict_of = [&](const char* name) {
    for (const auto& v : out.verdicts)
      if (v.name == name) return v.positive;
    return false;
  };
  // An outer Steiner polynomial without positive set reach is reported as
  // such whatever the boundary group says.
  if (verdict_of("outer_fit") && !verdict_of("reach_set"))
    out.classification = "outer-Steiner-only";
  else if (!out.unanimous)
    out.classification = "disagreement";
  else
    out.classification = first->positive ? "positive" : "negative";
  return out;
}

} // namespace reachlab
