#pragma once

#include <optional>

#include "shapes.hpp"
#include "steiner.hpp"

namespace reachlab {

enum class ReachMethod { semigroup, normal_pair, convex_roundtrip };
enum class ReachTarget { set, boundary };

inline const char* to_string(ReachMethod m) {
  switch (m) {
  case ReachMethod::semigroup: return "semigroup";
  case ReachMethod::normal_pair: return "normal_pair";
  case ReachMethod::convex_roundtrip: return "convex_roundtrip";
  }
  return "?";
}

inline const char* to_string(ReachTarget t) { return t == ReachTarget::set ? "set" : "boundary"; }

//! Evidence for an upper bound: an offset pair (s, t) whose semigroup check
//! failed, or a sample pair (a, b) attaining the pairwise bound.
struct ReachWitness {
  bool offsets = true;
  double s = 0.0, t = 0.0;
  Point location{};          // a discrepancy cell center (offset witnesses)
  double discrepancy = 0.0;  // slack volume of the failed check
  std::int64_t a = -1, b = -1;
  Point pa{}, pb{};
};

struct ReachEstimate {
  double value = 0.0;
  ReachMethod method = ReachMethod::semigroup;
  double lo = 0.0, hi = 0.0;
  std::optional<ReachWitness> witness;
};

// ---- digital convexity ---------------------------------------------------

//! True if every axis-parallel and face-diagonal lattice line meets the
//! occupied cells in at most one run. Exact for center rasterizations of
//! convex sets (a line meets a convex set in a segment).
inline bool is_digitally_convex(const BinaryGrid& g) {
  const auto& ge = g.geom;
  std::vector<std::array<int, 3>> dirs;
  if (ge.dim == 2)
    dirs = {{1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {1, -1, 0}};
  else
    dirs = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, -1, 0}, {1, 0, 1}, {1, 0, -1}, {0, 1, 1}, {0, 1, -1}};
  auto inside = [&](const std::array<std::int64_t, 3>& c) {
    for (int a = 0; a < 3; ++a)
      if (c[a] < 0 || c[a] >= ge.size[a]) return false;
    return true;
  };
  for (const auto& d : dirs) {
    for (std::int64_t i = 0; i < ge.cell_count(); ++i) {
      auto c = ge.coords(i);
      std::array<std::int64_t, 3> prev{c[0] - d[0], c[1] - d[1], c[2] - d[2]};
      if (inside(prev)) continue; // not a line start
      int runs = 0;
      bool in_run = false;
      for (auto q = c; inside(q); q = {q[0] + d[0], q[1] + d[1], q[2] + d[2]}) {
        bool occ = g.occupied(ge.index(q[0], q[1], q[2]));
        if (occ && !in_run) ++runs;
        in_run = occ;
      }
      if (runs > 1) return false;
    }
  }
  return true;
}

// ---- semigroup estimator -------------------------------------------------

struct SemigroupOptions {
  int scan = 12;                 // s values and t values per candidate r
  double violation_cells = 2.0;  // slack difference above this many cells is a violation
  double resolution_cells = 2.0; // binary search stops at this width in r
};

namespace detail {

inline std::vector<double> scan_values(double lo, double hi, int count, double h) {
  std::vector<double> out;
  if (hi < lo) return out;
  for (int k = 0; k < count; ++k) {
    double v = snap_to_lattice(count == 1 ? lo : lo + (hi - lo) * k / (count - 1), h);
    if (v == 0.0) continue;
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  std::sort(out.begin(), out.end(), [](double x, double y) { return std::abs(x) < std::abs(y) || (std::abs(x) == std::abs(y) && x < y); });
  return out;
}

// First violation of (A_s)_t = A_{s+t} over the scan lattice for candidate r.
inline std::optional<ReachWitness> semigroup_violation(const DistanceField& f, double r, ReachTarget target,
                                                       const SemigroupOptions& opt) {
  const double h = f.geom.spacing;
  const double cell = cell_volume(f.geom);
  auto svals = target == ReachTarget::set ? scan_values(h, r - h, opt.scan, h)
                                          : scan_values(-(r - h), r - h, opt.scan, h);
  std::vector<std::optional<ReachWitness>> found(svals.size());
  std::vector<std::exception_ptr> errors(svals.size());
  parallel_for(static_cast<std::int64_t>(svals.size()), [&](std::int64_t k) {
    try {
      double s = svals[k];
      BinaryGrid as;
      try {
        as = parallel_set(f, s);
      } catch (const DegenerateSet&) {
        return;
      }
      if (is_trivial(as)) return;
      auto fs = distance_transform(as);
      // t of opposite sign, |t| <= |s| so that s + t stays inside (-r, r).
      auto tvals = s > 0 ? scan_values(-s, -h, opt.scan, h) : scan_values(h, -s, opt.scan, h);
      for (double t : tvals) {
        BinaryGrid lhs, rhs;
        bool lhs_empty = false, rhs_empty = false;
        try {
          lhs = parallel_set(fs, t);
        } catch (const DegenerateSet&) {
          lhs_empty = true;
        }
        try {
          rhs = parallel_set(f, snap_to_lattice(s + t, h));
        } catch (const DegenerateSet&) {
          rhs_empty = true;
        }
        if (lhs_empty || rhs_empty) {
          if (lhs_empty != rhs_empty) {
            ReachWitness w;
            w.s = s;
            w.t = t;
            w.discrepancy = volume(lhs_empty ? rhs : lhs);
            found[k] = w;
            return;
          }
          continue;
        }
        auto cells = slack_difference_cells(lhs, rhs);
        if (static_cast<double>(cells.size()) > opt.violation_cells) {
          ReachWitness w;
          w.s = s;
          w.t = t;
          w.location = f.geom.center(cells.front());
          w.discrepancy = static_cast<double>(cells.size()) * cell;
          found[k] = w;
          return;
        }
      }
    } catch (...) {
      errors[k] = std::current_exception();
    }
  });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (auto& w : found)
    if (w) return w;
  return std::nullopt;
}

} // namespace detail

//! Largest r in (0, r_max] for which no scanned (s, t) breaks the semigroup
//! identity (A_s)_t = A_{s+t}: s in (0, r) for the set, s in (-r, r) for
//! the boundary, t of opposite sign.
inline ReachEstimate reach_semigroup(const DistanceField& f, double r_max, ReachTarget target,
                                     const SemigroupOptions& opt = {}) {
  const double h = f.geom.spacing;
  if (!(r_max >= 2 * h)) throw InvalidArgument("reach_semigroup: r_max must be at least two cells");
  if (r_max >= outer_margin(f)) throw PaddingError("reach_semigroup: r_max exceeds the guard margin");
  if (target == ReachTarget::boundary && r_max >= max_clearance(f))
    throw InvalidArgument("reach_semigroup: r_max exceeds the inradius");
  const double step = opt.resolution_cells * h;
  ReachEstimate est;
  est.method = ReachMethod::semigroup;
  auto top = detail::semigroup_violation(f, r_max, target, opt);
  if (!top) {
    est.value = r_max;
    est.lo = std::max(0.0, r_max - step);
    est.hi = r_max + step;
    return est;
  }
  double lo = 0.0, hi = r_max;
  std::optional<ReachWitness> witness = top;
  while (hi - lo > step) {
    double mid = snap_to_lattice(0.5 * (lo + hi), h);
    if (mid <= lo || mid >= hi) break;
    if (auto w = detail::semigroup_violation(f, mid, target, opt)) {
      hi = mid;
      witness = w;
    } else
      lo = mid;
  }
  est.value = lo;
  est.lo = std::max(0.0, lo - step);
  est.hi = lo + step;
  est.witness = witness;
  return est;
}

inline ReachEstimate reach_semigroup(const BinaryGrid& g, double r_max, ReachTarget target,
                                     const SemigroupOptions& opt = {}) {
  return reach_semigroup(distance_transform(g), r_max, target, opt);
}

//! Largest r_max the boundary scan accepts on this grid.
inline double boundary_scan_limit(const DistanceField& f) {
  double h = f.geom.spacing;
  double lim = std::min(max_clearance(f), outer_margin(f)) - h;
  return std::floor(lim / h) * h;
}

// ---- pairwise normal bound ----------------------------------------------

//! min over ordered pairs of |b - a|^2 / (2 |<b - a, nu(a)>|).
inline ReachEstimate reach_normal_pairs(const PointedSample& ps) {
  validate(ps);
  if (ps.any_flagged()) throw InvalidArgument("reach_normal_pairs: sample contains points with non-unique normals");
  const auto m = static_cast<std::int64_t>(ps.size());
  double diameter = 0.0;
  {
    Point lo = ps.points[0], hi = ps.points[0];
    for (const auto& p : ps.points)
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], p[a]);
        hi[a] = std::max(hi[a], p[a]);
      }
    diameter = norm(hi - lo);
  }
  const double eps = 1e-12 * diameter;
  std::vector<double> best(m, std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> arg(m, -1);
  std::vector<double> spacing(m, std::numeric_limits<double>::infinity());
  parallel_for(m, [&](std::int64_t i) {
    const Point& a = ps.points[i];
    const Point& nu = ps.normals[i];
    for (std::int64_t j = 0; j < m; ++j) {
      if (j == i) continue;
      Point d = ps.points[j] - a;
      double dd = dot(d, d);
      spacing[i] = std::min(spacing[i], std::sqrt(dd));
      double den = std::abs(dot(d, nu));
      if (den < eps) continue;
      double ratio = dd / (2.0 * den);
      if (ratio < best[i]) {
        best[i] = ratio;
        arg[i] = j;
      }
    }
  });
  ReachEstimate est;
  est.method = ReachMethod::normal_pair;
  est.value = std::numeric_limits<double>::infinity();
  std::int64_t ia = -1;
  double density = 0.0;
  for (std::int64_t i = 0; i < m; ++i) {
    density = std::max(density, spacing[i]);
    if (arg[i] >= 0 && best[i] < est.value) {
      est.value = best[i];
      ia = i;
    }
  }
  if (ia < 0) throw InvalidArgument("reach_normal_pairs: every pair lies in a common tangent plane");
  est.lo = std::max(0.0, est.value - density);
  est.hi = est.value + density;
  ReachWitness w;
  w.offsets = false;
  w.a = ia;
  w.b = arg[ia];
  w.pa = ps.points[ia];
  w.pb = ps.points[arg[ia]];
  est.witness = w;
  return est;
}

// ---- convex roundtrip and Hadwiger class ---------------------------------

struct RoundtripResult {
  bool holds = false;
  double discrepancy = 0.0;   // symmetric difference volume of (K_{-r})_r and K
  double slack_volume = 0.0;  // the part beyond one cell of slack
  double tolerance = 0.0;
  Point location{};
};

inline RoundtripResult convex_roundtrip(const DistanceField& f, double r, double violation_cells = 2.0) {
  if (!is_digitally_convex(f.source)) throw InvalidArgument("convex_roundtrip: grid is not convex");
  if (!(r > 0.0) || r >= inradius(f)) throw InvalidArgument("convex_roundtrip: r must lie in (0, inradius)");
  auto inner = parallel_set(f, snap_to_lattice(-r, f.geom.spacing));
  auto back = parallel_set(distance_transform(inner), snap_to_lattice(r, f.geom.spacing));
  RoundtripResult res;
  res.discrepancy = symmetric_difference_volume(back, f.source);
  auto cells = slack_difference_cells(back, f.source);
  res.slack_volume = static_cast<double>(cells.size()) * cell_volume(f.geom);
  res.tolerance = violation_cells * cell_volume(f.geom);
  res.holds = res.slack_volume <= res.tolerance;
  if (!cells.empty()) res.location = f.geom.center(cells.front());
  return res;
}

inline RoundtripResult convex_roundtrip(const BinaryGrid& g, double r) { return convex_roundtrip(distance_transform(g), r); }

struct HadwigerVerdict {
  bool member = false;
  RoundtripResult roundtrip;
  std::vector<double> derivative;  // central difference dW_i/ds, i < n
  std::vector<double> formula;     // (n - i) W_{i+1}(s)
  std::vector<double> residuals;   // relative mismatch per i
};

//! Roundtrip verdict plus a numerical check of W_i'(s) = (n - i) W_{i+1}(s)
//! by central differences of outer fits at s +- delta.
inline HadwigerVerdict hadwiger_membership(const DistanceField& f, double r, double s = 0.0, double delta = 0.1) {
  HadwigerVerdict v;
  v.roundtrip = convex_roundtrip(f, r);
  v.member = v.roundtrip.holds;
  const double h = f.geom.spacing;
  const int n = f.geom.dim;
  auto fit_at = [&](double x) {
    x = snap_to_lattice(x, h);
    DistanceField fx = x == 0.0 ? f : distance_transform(parallel_set(f, x));
    return fit_outer(fx, default_outer_window(fx, 0.5));
  };
  auto plus = fit_at(s + delta), minus = fit_at(s - delta), mid = fit_at(s);
  double span = snap_to_lattice(s + delta, h) - snap_to_lattice(s - delta, h);
  for (int i = 0; i < n; ++i) {
    double d = (plus.quermass[i] - minus.quermass[i]) / span;
    double want = (n - i) * mid.quermass[i + 1];
    v.derivative.push_back(d);
    v.formula.push_back(want);
    v.residuals.push_back(std::abs(d - want) / std::max(std::abs(want), 1e-12));
  }
  return v;
}

inline HadwigerVerdict hadwiger_membership(const BinaryGrid& g, double r, double s = 0.0, double delta = 0.1) {
  return hadwiger_membership(distance_transform(g), r, s, delta);
}

} // namespace reachlab
