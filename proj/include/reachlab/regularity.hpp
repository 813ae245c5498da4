#pragma once

#include <functional>

#include "reach.hpp"

namespace reachlab {

//! Function values on a regular lattice in R^1 or R^2 with spacing delta.
struct SampledFunction {
  int dim = 1;
  std::int64_t size[2] = {0, 1};
  double origin[2] = {0.0, 0.0};
  double spacing = 0.0;
  std::vector<double> values;
  double bound = 0.0;  // sup |f| over the nodes

  std::int64_t node_count() const { return size[0] * size[1]; }
  double at(std::int64_t i, std::int64_t j = 0) const { return values[static_cast<std::size_t>(j * size[0] + i)]; }
  double coord(int axis, std::int64_t i) const { return origin[axis] + spacing * static_cast<double>(i); }
};

inline void validate(const SampledFunction& f) {
  if (f.dim != 1 && f.dim != 2) throw InvalidArgument("sampled function: dimension must be 1 or 2");
  if (!(f.spacing > 0.0) || !std::isfinite(f.spacing)) throw InvalidArgument("sampled function: spacing must be positive");
  if (f.size[0] < 1 || f.size[1] < 1 || (f.dim == 1 && f.size[1] != 1))
    throw InvalidArgument("sampled function: bad lattice size");
  if (static_cast<std::int64_t>(f.values.size()) != f.node_count())
    throw InvalidArgument("sampled function: value count does not match the lattice");
  double m = 0.0;
  for (double v : f.values) {
    if (!std::isfinite(v)) throw InvalidArgument("sampled function: non-finite value");
    m = std::max(m, std::abs(v));
  }
  if (m != f.bound) throw InvalidArgument("sampled function: bound does not match the values");
}

inline void refresh_bound(SampledFunction& f) {
  f.bound = 0.0;
  for (double v : f.values) f.bound = std::max(f.bound, std::abs(v));
}

//! Samples fn at lo, lo + delta, ... up to hi (inclusive within rounding).
inline SampledFunction sample_function(const std::function<double(double)>& fn, double lo, double hi, double delta) {
  if (!(delta > 0.0) || !(hi > lo)) throw InvalidArgument("sample_function: need lo < hi and delta > 0");
  SampledFunction f;
  f.dim = 1;
  f.size[0] = static_cast<std::int64_t>(std::floor((hi - lo) / delta + 1e-9)) + 1;
  f.origin[0] = lo;
  f.spacing = delta;
  for (std::int64_t i = 0; i < f.size[0]; ++i) f.values.push_back(fn(f.coord(0, i)));
  refresh_bound(f);
  return f;
}

inline SampledFunction sample_function(const std::function<double(double, double)>& fn, double lo, double hi,
                                       double delta) {
  auto line = sample_function([](double) { return 0.0; }, lo, hi, delta);
  SampledFunction f;
  f.dim = 2;
  f.size[0] = f.size[1] = line.size[0];
  f.origin[0] = f.origin[1] = lo;
  f.spacing = delta;
  for (std::int64_t j = 0; j < f.size[1]; ++j)
    for (std::int64_t i = 0; i < f.size[0]; ++i) f.values.push_back(fn(f.coord(0, i), f.coord(1, j)));
  refresh_bound(f);
  return f;
}

enum class Verdict { consistent, inconsistent };
inline const char* to_string(Verdict v) { return v == Verdict::consistent ? "consistent" : "inconsistent"; }

struct LadderRung {
  double step = 0.0;
  double ratio = 0.0;
};

struct RegularityReport {
  double alpha = 1.0;
  double C_hat = 0.0;
  double divergence_trend = 0.0;
  Verdict verdict = Verdict::consistent;
  std::array<double, 2> worst_x{};
  std::array<double, 2> worst_step{};
  std::vector<LadderRung> ladder;
  int directions = 0;
};

struct ScanOptions {
  double slope_threshold = 0.1;
};

namespace detail {

struct Direction {
  int di, dj;
};

inline std::vector<Direction> scan_directions(const SampledFunction& f) {
  if (f.dim == 1) return {{1, 0}};
  return {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
}

// Largest admissible multiple k so that k * |dir| stays within a quarter
// of the domain width along the axes the direction uses.
inline std::int64_t max_multiple(const SampledFunction& f, const Direction& d) {
  std::int64_t k = std::numeric_limits<std::int64_t>::max();
  if (d.di != 0) k = std::min(k, (f.size[0] - 1) / 4);
  if (d.dj != 0) k = std::min(k, (f.size[1] - 1) / 4);
  return std::max<std::int64_t>(k, 1);
}

inline bool stencil_ok(const SampledFunction& f, std::int64_t i, std::int64_t j, const Direction& d, std::int64_t k) {
  auto in = [&](std::int64_t a, std::int64_t b) { return a >= 0 && a < f.size[0] && b >= 0 && b < f.size[1]; };
  return in(i - k * d.di, j - k * d.dj) && in(i + k * d.di, j + k * d.dj);
}

inline double second_difference(const SampledFunction& f, std::int64_t i, std::int64_t j, const Direction& d,
                                std::int64_t k) {
  return f.at(i - k * d.di, j - k * d.dj) - 2.0 * f.at(i, j) + f.at(i + k * d.di, j + k * d.dj);
}

inline double step_length(const SampledFunction& f, const Direction& d, std::int64_t k) {
  return static_cast<double>(k) * f.spacing * std::sqrt(static_cast<double>(d.di * d.di + d.dj * d.dj));
}

} // namespace detail

//! Max of |f(x-h) - 2f(x) + f(x+h)| / |h|^(1+alpha) over lattice nodes x and
//! steps h = k * delta * dir (dir along the axes, and the diagonals in 2-D),
//! with k up to a quarter of the domain width. The divergence trend is minus
//! the log-log slope of the ratio over steps 4, 2, 1 at the maximizing x.
inline RegularityReport second_difference_scan(const SampledFunction& f, double alpha, const ScanOptions& opt = {}) {
  validate(f);
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("second_difference_scan: alpha must lie in (0, 1]");
  bool fits = f.size[0] >= 3 && (f.dim == 1 || f.size[1] >= 3);
  if (!fits) throw InvalidArgument("second_difference_scan: domain too small for a three-point stencil");
  const auto dirs = detail::scan_directions(f);
  const double p = 1.0 + alpha;
  std::vector<std::int64_t> kmax;
  for (const auto& d : dirs) kmax.push_back(detail::max_multiple(f, d));

  struct Best {
    double ratio = -1.0;
    std::size_t dir = 0;
    std::int64_t k = 0;
  };
  const std::int64_t nodes = f.node_count();
  std::vector<Best> best(nodes);
  parallel_for(nodes, [&](std::int64_t n) {
    std::int64_t i = n % f.size[0], j = n / f.size[0];
    Best b;
    for (std::size_t q = 0; q < dirs.size(); ++q)
      for (std::int64_t k = 1; k <= kmax[q]; ++k) {
        if (!detail::stencil_ok(f, i, j, dirs[q], k)) break;
        double r = std::abs(detail::second_difference(f, i, j, dirs[q], k)) /
                   std::pow(detail::step_length(f, dirs[q], k), p);
        if (r > b.ratio) b = {r, q, k};
      }
    best[n] = b;
  });
  double top_ratio = -1.0;
  for (std::int64_t n = 0; n < nodes; ++n) top_ratio = std::max(top_ratio, best[n].ratio);
  if (top_ratio < 0.0) throw InvalidArgument("second_difference_scan: domain too small for a three-point stencil");
  // Ties (up to rounding) go to the node with the widest ladder, then to the
  // first node in scan order.
  auto ladder_top = [&](std::int64_t n) {
    std::int64_t k = 4;
    while (k > 1 && !detail::stencil_ok(f, n % f.size[0], n / f.size[0], dirs[best[n].dir], k)) k /= 2;
    return k;
  };
  std::int64_t arg = -1, arg_top = 0;
  for (std::int64_t n = 0; n < nodes; ++n) {
    if (best[n].ratio < top_ratio * (1.0 - 1e-12)) continue;
    std::int64_t t = ladder_top(n);
    if (t > arg_top) {
      arg = n;
      arg_top = t;
    }
  }

  RegularityReport rep;
  rep.alpha = alpha;
  rep.directions = static_cast<int>(dirs.size());
  rep.C_hat = best[arg].ratio;
  const auto& d = dirs[best[arg].dir];
  std::int64_t i = arg % f.size[0], j = arg / f.size[0];
  rep.worst_x = {f.coord(0, i), f.dim == 2 ? f.coord(1, j) : 0.0};
  double len = detail::step_length(f, d, best[arg].k) / std::sqrt(static_cast<double>(d.di * d.di + d.dj * d.dj));
  rep.worst_step = {len * d.di, len * d.dj};

  // Ladder 4, 2, 1 lattice steps at the worst node, dropping the rungs whose
  // stencil leaves the domain there. A single rung carries no trend.
  std::int64_t top = 4;
  while (top > 1 && !detail::stencil_ok(f, i, j, d, top)) top /= 2;
  const std::int64_t li = i, lj = j;
  std::vector<double> lx, ly;
  for (std::int64_t k = top; k >= 1; k /= 2) {
    if (!detail::stencil_ok(f, li, lj, d, k)) continue;
    double step = detail::step_length(f, d, k);
    double r = std::abs(detail::second_difference(f, li, lj, d, k)) / std::pow(step, p);
    rep.ladder.push_back({step, r});
    if (r > 0.0) {
      lx.push_back(std::log(step));
      ly.push_back(std::log(r));
    }
  }
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t q = 0; q < lx.size(); ++q) {
      mx += lx[q];
      my += ly[q];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxy = 0, sxx = 0;
    for (std::size_t q = 0; q < lx.size(); ++q) {
      sxy += (lx[q] - mx) * (ly[q] - my);
      sxx += (lx[q] - mx) * (lx[q] - mx);
    }
    rep.divergence_trend = -sxy / sxx;
  }
  rep.verdict = rep.divergence_trend > opt.slope_threshold ? Verdict::inconsistent : Verdict::consistent;
  return rep;
}

// ---- graph patches -------------------------------------------------------

struct PatchOptions {
  double spacing = 0.0;      // lattice spacing of the patch; 0 picks max(window / 50, 4 sample gaps)
  bool allow_flagged = false; // use the secant normal at a flagged point
};

namespace detail {

inline std::vector<std::int64_t> loop_of(const PointedSample& ps, std::int64_t a, std::size_t& pos) {
  for (const auto& loop : ps.loops)
    for (std::size_t k = 0; k < loop.size(); ++k)
      if (loop[k] == a) {
        pos = k;
        return loop;
      }
  throw InvalidArgument("extract_graph_patch: point is not on any loop");
}

} // namespace detail

//! Local height function of a closed curve sample around point a: the
//! tangent line at a becomes the u axis and the height is measured along the
//! inner normal, so convex pieces give f >= 0. Heights are interpolated
//! linearly in loop order onto u = -window .. window.
inline SampledFunction extract_graph_patch(const PointedSample& ps, std::int64_t a, double window,
                                           const PatchOptions& opt = {}) {
  validate(ps);
  if (ps.dim != 2) throw InvalidArgument("extract_graph_patch: curves (n = 2) only");
  if (a < 0 || a >= static_cast<std::int64_t>(ps.size())) throw InvalidArgument("extract_graph_patch: index out of range");
  if (!(window > 0.0)) throw InvalidArgument("extract_graph_patch: window must be positive");
  std::size_t pos = 0;
  auto loop = detail::loop_of(ps, a, pos);
  const auto L = static_cast<std::int64_t>(loop.size());
  auto at = [&](std::int64_t step) { return loop[static_cast<std::size_t>(((static_cast<std::int64_t>(pos) + step) % L + L) % L)]; };
  const Point& pa = ps.points[a];
  Point nu = ps.normals[a];
  if (ps.flagged[a]) {
    if (!opt.allow_flagged) throw InvalidArgument("extract_graph_patch: point has no unique normal");
    Point sec = ps.points[at(1)] - ps.points[at(-1)];
    Point cand{sec[1], -sec[0], 0.0};
    if (dot(cand, nu) < 0) cand = -1.0 * cand;
    nu = normalized(cand);
  }
  const Point tau{-nu[1], nu[0], 0.0};
  auto frame = [&](const Point& p) {
    Point d = p - pa;
    return std::pair<double, double>{dot(d, tau), -dot(d, nu)};
  };

  // Walk both ways until |u| passes the window; u must stay monotone.
  std::vector<std::pair<double, double>> fwd{{0.0, 0.0}}, bwd;
  for (int sign : {1, -1}) {
    auto& out = sign > 0 ? fwd : bwd;
    double last = 0.0;
    bool passed = false;
    for (std::int64_t step = 1; step < L; ++step) {
      auto [u, v] = frame(ps.points[at(sign * step)]);
      if (sign * u <= sign * last) throw NotGraphError("extract_graph_patch: patch fails the vertical-line test");
      out.push_back({u, v});
      last = u;
      if (sign * u >= window) {
        passed = true;
        break;
      }
    }
    if (!passed) throw NotGraphError("extract_graph_patch: window exceeds the curve");
  }
  std::vector<std::pair<double, double>> graph(bwd.rbegin(), bwd.rend());
  graph.insert(graph.end(), fwd.begin(), fwd.end());

  double gap = 0.0;
  for (std::size_t k = 0; k + 1 < graph.size(); ++k) gap = std::max(gap, graph[k + 1].first - graph[k].first);
  double delta = opt.spacing > 0.0 ? opt.spacing : std::max(window / 50.0, 4.0 * gap);
  auto half = static_cast<std::int64_t>(std::floor(window / delta + 1e-9));
  SampledFunction f;
  f.dim = 1;
  f.size[0] = 2 * half + 1;
  f.origin[0] = -static_cast<double>(half) * delta;
  f.spacing = delta;
  std::size_t seg = 0;
  for (std::int64_t i = 0; i < f.size[0]; ++i) {
    double u = f.coord(0, i);
    while (seg + 2 < graph.size() && graph[seg + 1].first < u) ++seg;
    auto [u0, v0] = graph[seg];
    auto [u1, v1] = graph[seg + 1];
    double w = (u - u0) / (u1 - u0);
    f.values.push_back(v0 + w * (v1 - v0));
  }
  refresh_bound(f);
  return f;
}

//! Largest |f'| between neighboring lattice nodes.
inline double lipschitz_bound(const SampledFunction& f) {
  validate(f);
  double L = 0.0;
  for (std::int64_t j = 0; j < f.size[1]; ++j)
    for (std::int64_t i = 0; i + 1 < f.size[0]; ++i) L = std::max(L, std::abs(f.at(i + 1, j) - f.at(i, j)) / f.spacing);
  for (std::int64_t j = 0; j + 1 < f.size[1]; ++j)
    for (std::int64_t i = 0; i < f.size[0]; ++i) L = std::max(L, std::abs(f.at(i, j + 1) - f.at(i, j)) / f.spacing);
  return L;
}

// ---- regularity vs reach -------------------------------------------------

struct CrosscheckOptions {
  int probes = 8;
  double window = 0.0;           // 0 picks 0.3 * reach, at least 20 sample spacings
  double kappa_safety = 1.25;
  double positive_reach = 0.0;   // reach counted as positive above this; 0 picks 4 sample spacings
};

struct ProbeResult {
  std::int64_t index = -1;
  Point point{};
  bool flagged = false;
  double window = 0.0;
  bool skipped = false;  // no graph window of at least four sample gaps
  double lipschitz = 0.0;
  RegularityReport report;
};

struct RegularityCrosscheck {
  std::vector<ProbeResult> probes;
  double max_C_hat = 0.0;
  ReachEstimate reach;
  double c = 1.0;                 // sqrt(1 + L^2) over the probed patches
  double bound = 0.0;             // kappa * c^2 / reach
  bool bound_ok = false;
  bool regular = false;           // every alpha = 1 scan consistent
  bool reach_positive = false;
  bool consistent = false;        // regular and within the bound
  bool agree = false;             // regularity and reach tell the same story
};

//! alpha = 1 scans on graph patches at evenly spaced probes (plus every
//! flagged corner), compared with the bound c^2 / reach that a set of
//! positive reach must satisfy.
inline RegularityCrosscheck regularity_reach_crosscheck(const PointedSample& ps, const CrosscheckOptions& opt = {}) {
  validate(ps);
  if (opt.probes < 1) throw InvalidArgument("regularity_reach_crosscheck: need at least one probe");
  RegularityCrosscheck out;
  PointedSample smooth;
  smooth.dim = ps.dim;
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (!ps.flagged[i]) {
      smooth.points.push_back(ps.points[i]);
      smooth.normals.push_back(ps.normals[i]);
      smooth.flagged.push_back(false);
    }
  out.reach = reach_normal_pairs(smooth);

  double spacing = 0.0;
  for (const auto& loop : ps.loops)
    for (std::size_t k = 0; k < loop.size(); ++k)
      spacing = std::max(spacing, norm(ps.points[loop[(k + 1) % loop.size()]] - ps.points[loop[k]]));
  double window = opt.window > 0.0 ? opt.window : std::max(0.3 * out.reach.value, 20.0 * spacing);
  double positive = opt.positive_reach > 0.0 ? opt.positive_reach : 4.0 * spacing;
  out.reach_positive = out.reach.value > positive;

  std::vector<std::int64_t> where;
  std::vector<std::int64_t> plain;
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (!ps.flagged[i]) plain.push_back(static_cast<std::int64_t>(i));
  for (int k = 0; k < opt.probes && !plain.empty(); ++k)
    where.push_back(plain[plain.size() * static_cast<std::size_t>(k) / static_cast<std::size_t>(opt.probes)]);
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (ps.flagged[i]) where.push_back(static_cast<std::int64_t>(i));

  out.probes.resize(where.size());
  std::vector<std::exception_ptr> errors(where.size());
  parallel_for(static_cast<std::int64_t>(where.size()), [&](std::int64_t q) {
    try {
      auto& pr = out.probes[q];
      pr.index = where[q];
      pr.point = ps.points[pr.index];
      pr.flagged = ps.flagged[pr.index];
      PatchOptions po;
      po.allow_flagged = true;
      // Near a corner the window may reach around it; shrink until the
      // patch is a graph.
      SampledFunction patch;
      for (double w = window;; w *= 0.5) {
        try {
          patch = extract_graph_patch(ps, pr.index, w, po);
          pr.window = w;
          break;
        } catch (const NotGraphError&) {
          if (w * 0.5 < 4.0 * spacing) {
            pr.skipped = true;
            return;
          }
        }
      }
      pr.lipschitz = lipschitz_bound(patch);
      pr.report = second_difference_scan(patch, 1.0);
    } catch (...) {
      errors[q] = std::current_exception();
    }
  });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  double L = 0.0;
  out.regular = true;
  for (const auto& pr : out.probes) {
    if (pr.skipped) continue;
    out.max_C_hat = std::max(out.max_C_hat, pr.report.C_hat);
    L = std::max(L, pr.lipschitz);
    if (pr.report.verdict == Verdict::inconsistent) out.regular = false;
  }
  out.c = std::sqrt(1.0 + L * L);
  out.bound = out.reach.value > 0.0 ? opt.kappa_safety * out.c * out.c / out.reach.value
                                    : std::numeric_limits<double>::infinity();
  out.bound_ok = out.max_C_hat <= out.bound;
  out.consistent = out.regular && out.bound_ok;
  out.agree = out.consistent == out.reach_positive;
  return out;
}

} // namespace reachlab
