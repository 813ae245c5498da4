#pragma once

#include "curvature.hpp"
#include "reach.hpp"

namespace reachlab {

enum class TerminalClass { lower_dimensional, zero_reach_boundary, truncated };

inline const char* to_string(TerminalClass c) {
  switch (c) {
  case TerminalClass::lower_dimensional: return "lower_dimensional";
  case TerminalClass::zero_reach_boundary: return "zero_reach_boundary";
  case TerminalClass::truncated: return "truncated";
  }
  return "?";
}

struct FlowOptions {
  double dt = 0.0;                    // 0 picks max(2h / omega_n, T / 64)
  double horizon_cap = std::numeric_limits<double>::infinity();
  double reach = 0.0;                 // boundary reach of K; 0 estimates it on the grid
  double terminal_inradius_cells = 2.0;
  double terminal_reach_cells = 4.0;
  const PointedSample* carrier = nullptr; // boundary polyline of K (n = 2), optional
};

struct FlowTrace {
  int n = 2;
  double spacing = 0.0;
  double reach = 0.0;
  double T = 0.0;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<BinaryGrid> bodies;
  std::vector<double> W_values;        // W_{n-1}(x(t_k))
  std::vector<std::string> W_source;   // "fit" or "curvature"
  std::vector<double> volumes;
  std::vector<double> hausdorff_steps; // d_H(x(t_k), x(t_{k+1}))
  BinaryGrid terminal;
  double terminal_inradius = 0.0;
  std::optional<double> terminal_reach;
  TerminalClass terminal_class = TerminalClass::truncated;
};

namespace detail {

inline double breadth_from_fit(const BinaryGrid& body) {
  auto f = distance_transform(body);
  auto fit = fit_outer(f, default_outer_window(f, 0.5));
  return fit.quermass[static_cast<std::size_t>(fit.n - 1)];
}

// Half the length of the carrier polyline moved inward by `depth` along its
// normals; valid while depth stays below the boundary reach.
inline double breadth_from_carrier(const PointedSample& ps, double depth) {
  PointedSample moved = ps;
  for (std::size_t i = 0; i < ps.size(); ++i) moved.points[i] = ps.points[i] - depth * ps.normals[i];
  return quermass_from_curvature(curvature_of_polyline(moved))[1];
}

} // namespace detail

//! The mean-breadth flow x(t) = K_{-omega_n t} up to T = reach(boundary) /
//! omega_n. Every body is an inner parallel set of K itself.
inline FlowTrace run_flow(const BinaryGrid& K, const FlowOptions& opt = {}) {
  validate(K);
  require_nontrivial(K, "run_flow");
  if (!is_digitally_convex(K)) throw InvalidArgument("run_flow: body is not convex");
  const auto field = distance_transform(K);
  FlowTrace tr;
  tr.n = K.geom.dim;
  tr.spacing = K.geom.spacing;
  const double h = tr.spacing;
  const double omega = unit_ball_volume(tr.n);
  tr.reach = opt.reach > 0.0 ? opt.reach
                             : reach_semigroup(field, boundary_scan_limit(field), ReachTarget::boundary).value;
  if (!(tr.reach > 0.0)) throw InvalidArgument("run_flow: boundary reach is not positive");
  tr.T = tr.reach / omega;
  const double min_dt = 2.0 * h / omega;
  tr.dt = opt.dt > 0.0 ? opt.dt : std::max(min_dt, tr.T / 64.0);
  if (tr.dt < min_dt * (1.0 - 1e-9)) throw InvalidArgument("run_flow: dt below lattice resolution");
  if (opt.carrier && (opt.carrier->dim != 2 || tr.n != 2 || opt.carrier->any_flagged()))
    throw InvalidArgument("run_flow: carrier must be a smooth polyline of a planar body");
  const double horizon = std::min(tr.T, opt.horizon_cap);
  for (std::int64_t k = 0;; ++k) {
    double t = static_cast<double>(k) * tr.dt;
    if (t > horizon * (1.0 + 1e-12)) break;
    tr.times.push_back(t);
  }

  const auto m = static_cast<std::int64_t>(tr.times.size());
  tr.bodies.resize(tr.times.size());
  tr.W_values.resize(tr.times.size());
  tr.W_source.resize(tr.times.size());
  tr.volumes.resize(tr.times.size());
  tr.hausdorff_steps.resize(tr.times.size() > 0 ? tr.times.size() - 1 : 0);
  std::vector<std::exception_ptr> errors(tr.times.size());
  std::vector<char> vanished(tr.times.size(), 0);
  parallel_for(m, [&](std::int64_t k) {
    try {
      double depth = omega * tr.times[k];
      try {
        tr.bodies[k] = k == 0 ? K : parallel_set(field, -depth);
      } catch (const DegenerateSet&) {
        vanished[k] = 1;
        return;
      }
      tr.volumes[k] = volume(tr.bodies[k]);
      if (opt.carrier && depth < tr.reach * (1.0 - 1e-9)) {
        tr.W_values[k] = detail::breadth_from_carrier(*opt.carrier, depth);
        tr.W_source[k] = "curvature";
      } else {
        tr.W_values[k] = detail::breadth_from_fit(tr.bodies[k]);
        tr.W_source[k] = "fit";
      }
      if (k + 1 < m) {
        try {
          tr.hausdorff_steps[k] = interface_hausdorff(field, depth, omega * tr.times[k + 1]);
        } catch (const DegenerateSet&) {
          tr.hausdorff_steps[k] = std::numeric_limits<double>::quiet_NaN();
        }
      }
    } catch (...) {
      errors[k] = std::current_exception();
    }
  });
  // A body that collapses onto a lower-dimensional set has no lattice cells
  // left; the trace stops before it.
  std::size_t keep = tr.times.size();
  for (std::size_t k = 0; k < vanished.size(); ++k)
    if (vanished[k]) {
      keep = k;
      break;
    }
  for (std::size_t k = 0; k < keep; ++k)
    if (errors[k]) std::rethrow_exception(errors[k]);
  tr.times.resize(keep);
  tr.bodies.resize(keep);
  tr.W_values.resize(keep);
  tr.W_source.resize(keep);
  tr.volumes.resize(keep);
  tr.hausdorff_steps.resize(keep - 1);

  // Terminal body: x(T), or the cap if it comes first.
  bool capped = opt.horizon_cap < tr.T;
  double depth_T = omega * horizon;
  bool empty = false;
  try {
    tr.terminal = parallel_set(field, -depth_T);
  } catch (const DegenerateSet&) {
    tr.terminal = BinaryGrid(K.geom);
    empty = true;
  }
  if (capped) {
    tr.terminal_class = TerminalClass::truncated;
    if (!empty) tr.terminal_inradius = inradius(distance_transform(tr.terminal));
    return tr;
  }
  if (!empty) tr.terminal_inradius = inradius(distance_transform(tr.terminal));
  if (empty || tr.terminal_inradius <= opt.terminal_inradius_cells * h) {
    tr.terminal_class = TerminalClass::lower_dimensional;
    return tr;
  }
  auto tf = distance_transform(tr.terminal);
  double limit = boundary_scan_limit(tf);
  if (limit >= 2.0 * h) {
    tr.terminal_reach = reach_semigroup(tf, limit, ReachTarget::boundary).value;
    tr.terminal_class = *tr.terminal_reach <= opt.terminal_reach_cells * h + 1e-12 ? TerminalClass::zero_reach_boundary
                                                                                   : TerminalClass::truncated;
  }
  return tr;
}

struct EdeCheck {
  double max_residual = 0.0;
  double worst_s = 0.0, worst_t = 0.0;
};

//! Largest |W(t) + 1/2 int |x'|^2 + 1/2 int |grad W|^2 - W(s)| over all
//! pairs of trace times, with the kinetic term from the measured Hausdorff
//! steps and the slope |grad W_{n-1}| = omega_n.
inline EdeCheck verify_ede(const FlowTrace& tr) {
  EdeCheck out;
  const std::size_t m = tr.times.size();
  const double omega = unit_ball_volume(tr.n);
  // Cumulative integrals from t_0.
  std::vector<double> kinetic(m, 0.0);
  for (std::size_t k = 1; k < m; ++k) {
    double dt = tr.times[k] - tr.times[k - 1];
    double speed = tr.hausdorff_steps[k - 1] / dt;
    kinetic[k] = kinetic[k - 1] + speed * speed * dt;
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) {
      double span = tr.times[j] - tr.times[i];
      double lhs = tr.W_values[j] + 0.5 * (kinetic[j] - kinetic[i]) + 0.5 * omega * omega * span;
      double r = std::abs(lhs - tr.W_values[i]);
      if (r > out.max_residual) {
        out.max_residual = r;
        out.worst_s = tr.times[i];
        out.worst_t = tr.times[j];
      }
    }
  return out;
}

struct SlopeSample {
  int i = 0;
  double t_probe = 0.0;
  double slope_value = 0.0;     // Richardson 2 Q(t/2) - Q(t), Q from the inner-branch base
  double formula_value = 0.0;
  double base = 0.0;            // W_i at depth 0+ from the depth ladder
  double quotient_t = 0.0;      // (base - W_i(K_{-t})) / t
  double quotient_half = 0.0;   // same at t / 2
  double ladder_slope = 0.0;    // minus the ladder polynomial's derivative at 0
  double raw_richardson = 0.0;  // the same extrapolation with W_i(K) as base
  std::vector<double> depths;
  std::vector<double> values;
};

//! One-sided slope of W_i along inner parallel sets against (n - i) W_{i+1}(K).
//! Lattice erosion sits a fraction of a cell off its nominal depth, so
//! W_i(K) itself is a poor base for difference quotients: the offset turns
//! into an O(h / t) error that Richardson triples. The base is instead the
//! intercept of a degree n - i least-squares polynomial through W_i(K_{-t})
//! on 17 depths in [h, t_probe]. t_probe = 0 picks 0.3 * inradius.
inline SlopeSample measure_slope(const BinaryGrid& K, int i, double t_probe = 0.0) {
  const auto field = distance_transform(K);
  const int n = K.geom.dim;
  const double h = K.geom.spacing;
  if (i < 0 || i >= n) throw InvalidArgument("measure_slope: index out of range");
  const double r_in = inradius(field);
  if (t_probe == 0.0) t_probe = snap_to_lattice(0.3 * r_in, h);
  if (t_probe < 8.0 * h || t_probe > 0.5 * r_in + 1e-12)
    throw InvalidArgument("measure_slope: t_probe outside [8h, inradius / 2]");
  // Window tied to the body's size so that the probe scales with it.
  const double window = 0.5 * r_in;
  auto quermass_of = [&](const DistanceField& f) { return fit_outer(f, default_outer_window(f, window)).quermass; };
  auto value_at = [&](double t) {
    auto g = parallel_set(field, -t);
    if (i == 0) return volume(g);
    return quermass_of(distance_transform(g))[static_cast<std::size_t>(i)];
  };
  const auto at_K = quermass_of(field);
  const auto ui = static_cast<std::size_t>(i);
  SlopeSample s;
  s.i = i;
  s.t_probe = t_probe;
  s.depths = offset_ladder(h, t_probe, 17, h);
  std::vector<std::pair<double, double>> samples;
  for (double t : s.depths) {
    s.values.push_back(value_at(t));
    samples.emplace_back(-t, s.values.back());
  }
  const auto fit = fit_steiner(samples, n - i);
  s.base = fit.coeffs[0];
  s.ladder_slope = fit.coeffs[1];
  const double half = snap_to_lattice(0.5 * t_probe, h);
  const double w_t = s.values.back(), w_half = value_at(half);
  s.quotient_t = (s.base - w_t) / t_probe;
  s.quotient_half = (s.base - w_half) / half;
  s.slope_value = 2.0 * s.quotient_half - s.quotient_t;
  const double w_K = i == 0 ? volume(K) : at_K[ui];
  s.raw_richardson = 2.0 * (w_K - w_half) / half - (w_K - w_t) / t_probe;
  s.formula_value = (n - i) * at_K[ui + 1];
  return s;
}

} // namespace reachlab
