#pragma once

#include <optional>

#include <Eigen/Dense>

#include "distance.hpp"

namespace reachlab {

struct VolumeSample {
  double s = 0.0;
  double volume = 0.0;
  bool degenerate = false;
};

//! Volume of A_s counted straight from the field, without building the grid.
inline double parallel_volume(const DistanceField& f, double s) {
  if (s == 0.0) return volume(f.source);
  const auto count = f.geom.cell_count();
  const double t = lattice_threshold(s, f.geom.spacing);
  std::int64_t kept = 0;
  if (s > 0.0) {
    for (std::int64_t i = 0; i < count; ++i) {
      bool in = f.source.occupied(i) || static_cast<double>(f.dist_sq[i]) <= t;
      if (in && f.geom.on_edge(i))
        throw PaddingError("outer parallel set at s = " + format_double(s) + " reaches the lattice edge");
      kept += in;
    }
  } else {
    for (std::int64_t i = 0; i < count; ++i) kept += static_cast<double>(f.clear_sq[i]) > t;
    if (kept == 0) throw DegenerateSet(s);
  }
  return static_cast<double>(kept) * cell_volume(f.geom);
}

//! V(s) for every offset in input order; empty inner sets are marked, not dropped.
inline std::vector<VolumeSample> sample_volumes(const DistanceField& f, const std::vector<double>& offsets) {
  std::vector<VolumeSample> out(offsets.size());
  std::vector<std::exception_ptr> errors(offsets.size());
  parallel_for(static_cast<std::int64_t>(offsets.size()), [&](std::int64_t i) {
    out[i].s = offsets[i];
    try {
      out[i].volume = parallel_volume(f, offsets[i]);
    } catch (const DegenerateSet&) {
      out[i].degenerate = true;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

inline std::vector<VolumeSample> sample_volumes(const BinaryGrid& g, const std::vector<double>& offsets) {
  if (offsets.empty()) return {};
  return sample_volumes(distance_transform(g), offsets);
}

//! `count` offsets evenly spread over [lo, hi], snapped to multiples of h,
//! duplicates removed.
inline std::vector<double> offset_ladder(double lo, double hi, int count, double h) {
  std::vector<double> out;
  for (int k = 0; k < count; ++k) {
    double s = count == 1 ? lo : lo + (hi - lo) * k / (count - 1);
    s = snap_to_lattice(s, h);
    if (s == 0.0) s = 0.0; // drop negative zero
    if (out.empty() || s != out.back()) out.push_back(s);
  }
  return out;
}

struct SteinerFit {
  int n = 2;
  std::vector<double> coeffs;
  std::vector<double> quermass;
  double s_lo = 0.0;
  double s_hi = 0.0;
  double rms_residual = 0.0;
  double max_residual = 0.0;
  double worst_offset = 0.0;
  std::vector<std::pair<double, double>> samples;
  std::vector<double> degenerate_offsets;

  double volume_at(double s) const {
    double v = 0.0, p = 1.0;
    for (double c : coeffs) {
      v += c * p;
      p *= s;
    }
    return v;
  }
};

//! Least-squares polynomial of degree n through the (s, V) samples, solved
//! with a column-pivoted Householder QR of the Vandermonde matrix.
inline SteinerFit fit_steiner(const std::vector<std::pair<double, double>>& samples, int n) {
  if (n < 1 || n > 3) throw InvalidArgument("fit_steiner: dimension must be 1..3");
  if (samples.size() < static_cast<std::size_t>(n + 2))
    throw InvalidArgument("fit_steiner: need at least n+2 samples");
  std::vector<double> xs;
  for (auto& [s, v] : samples) {
    if (!std::isfinite(s) || !std::isfinite(v)) throw InvalidArgument("fit_steiner: non-finite sample");
    xs.push_back(s);
  }
  std::sort(xs.begin(), xs.end());
  auto distinct = std::unique(xs.begin(), xs.end()) - xs.begin();
  if (distinct < n + 1) throw InvalidArgument("fit_steiner: rank-deficient design (too few distinct offsets)");

  const auto m = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd A(m, n + 1);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double p = 1.0;
    for (int k = 0; k <= n; ++k) {
      A(i, k) = p;
      p *= samples[i].first;
    }
    b(i) = samples[i].second;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < n + 1) throw InvalidArgument("fit_steiner: rank-deficient design");
  Eigen::VectorXd c = qr.solve(b);

  SteinerFit fit;
  fit.n = n;
  for (int k = 0; k <= n; ++k) {
    fit.coeffs.push_back(c(k));
    fit.quermass.push_back(c(k) / binomial(n, k));
  }
  fit.s_lo = xs.front();
  fit.s_hi = xs[distinct - 1];
  fit.samples = samples;
  CompensatedSum sq;
  for (auto& [s, v] : samples) {
    double r = std::abs(fit.volume_at(s) - v);
    sq.add(r * r);
    if (r > fit.max_residual) {
      fit.max_residual = r;
      fit.worst_offset = s;
    }
  }
  fit.rms_residual = std::sqrt(sq.value() / static_cast<double>(samples.size()));
  fit.rms_residual = std::min(fit.rms_residual, fit.max_residual);
  return fit;
}

//! Fit over the given offsets of a field; degenerate offsets are listed.
inline SteinerFit fit_offsets(const DistanceField& f, const std::vector<double>& offsets) {
  std::vector<std::pair<double, double>> pts;
  std::vector<double> degenerate;
  for (const auto& v : sample_volumes(f, offsets)) {
    if (v.degenerate)
      degenerate.push_back(v.s);
    else
      pts.emplace_back(v.s, v.volume);
  }
  auto fit = fit_steiner(pts, f.geom.dim);
  fit.degenerate_offsets = degenerate;
  return fit;
}

//! Outer-branch fit on [h, s_hi]. s = 0 is left out: on the lattice the
//! identity sits about a tenth of a cell off the outer branch.
inline SteinerFit fit_outer(const DistanceField& f, double s_hi, int count = 17) {
  double h = f.geom.spacing;
  if (!(s_hi > h)) throw InvalidArgument("fit_outer: window must exceed one cell");
  if (s_hi >= outer_margin(f)) throw PaddingError("fit_outer: window exceeds the guard margin");
  return fit_offsets(f, offset_ladder(h, s_hi, count, h));
}

//! Default outer window: as wide as the guard margin allows, capped at `cap`.
inline double default_outer_window(const DistanceField& f, double cap = 1.0) {
  double h = f.geom.spacing;
  double w = snap_to_lattice(std::min(cap, outer_margin(f) - 2.0 * h), h);
  if (w < 4.0 * h) throw PaddingError("grid guard margin too small for an outer fit");
  return w;
}

//! H^{n-1}(boundary) estimate from secants between dyadic rungs
//! {4h, 8h, 16h} (plus 32h for n = 3). Each secant (V(b) - V(a))/(b - a)
//! equals c_1 + c_2 (a + b) + c_3 (a^2 + ab + b^2); solving for c_1 is the
//! Richardson extrapolation to s -> 0+. Secants between rungs never touch
//! V(A) itself, whose lattice offset differs from the outer branch, and the
//! rungs start above the 2h scale where lattice counting noise dominates.
//! `from_fit` is n * W_1 of an outer fit, for cross-checking.
struct MinkowskiContent {
  double value = 0.0;
  double from_fit = 0.0;
};

inline MinkowskiContent minkowski_content(const DistanceField& f) {
  const double h = f.geom.spacing;
  const int n = f.geom.dim;
  std::vector<double> rungs{4 * h, 8 * h, 16 * h};
  if (n == 3) rungs.push_back(32 * h);
  std::vector<double> vols;
  for (double r : rungs) vols.push_back(parallel_volume(f, r));
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    double a = rungs[i], b = rungs[i + 1];
    y(i) = (vols[i + 1] - vols[i]) / (b - a);
    A(i, 0) = 1.0;
    A(i, 1) = a + b;
    if (n == 3) A(i, 2) = a * a + a * b + b * b;
  }
  MinkowskiContent mc;
  mc.value = A.colPivHouseholderQr().solve(y)(0);
  auto fit = fit_outer(f, default_outer_window(f, 0.5));
  mc.from_fit = n * fit.quermass[1];
  return mc;
}

inline MinkowskiContent minkowski_content(const BinaryGrid& g) { return minkowski_content(distance_transform(g)); }

//! Chi estimate W_n / omega_n.
inline double euler_from_fit(const SteinerFit& fit) { return fit.quermass[fit.n] / unit_ball_volume(fit.n); }

//! |W_i(A_s) - sum_k binom(n-i, k-i) W_k(A) s^(k-i)| for i = 0..n.
inline std::vector<double> shift_check(const SteinerFit& at0, const SteinerFit& at_s, double s) {
  if (at0.n != at_s.n) throw InvalidArgument("shift_check: fits of different dimension");
  const int n = at0.n;
  std::vector<double> out;
  for (int i = 0; i <= n; ++i) {
    double pred = 0.0;
    for (int k = i; k <= n; ++k) pred += binomial(n - i, k - i) * at0.quermass[k] * std::pow(s, k - i);
    out.push_back(std::abs(at_s.quermass[i] - pred));
  }
  return out;
}

struct AlternatingOptions {
  double tau_factor = 3.0; // tau_fit = tau_factor * h * H^{n-1} * r
  int bases = 9;           // base offsets s: interior points of linspace(-r, r, bases)
  int per_base = 17;       // composite offsets u = s + t per base
};

struct AlternatingResult {
  SteinerFit fit;
  bool holds = false;
  double tau = 0.0;
  double boundary_measure = 0.0;
  double worst_offset = 0.0; // u = s + t of the largest residual
  double worst_base = 0.0;   // the s it came from
};

//! One degree-n polynomial fitted jointly to V((A_s)_t) over base offsets
//! s in (-r, r) and composite offsets u = s + t in [-r, r].
inline AlternatingResult alternating_fit(const DistanceField& f, double r, const AlternatingOptions& opt = {}) {
  const double h = f.geom.spacing;
  if (!(r >= 2 * h)) throw InvalidArgument("alternating_fit: r must be at least two cells");
  if (r >= max_clearance(f)) throw InvalidArgument("alternating_fit: r exceeds the inradius");
  if (r >= outer_margin(f)) throw PaddingError("alternating_fit: r exceeds the guard margin");
  std::vector<double> bases;
  for (int k = 1; k + 1 < opt.bases; ++k) {
    double s = snap_to_lattice(-r + 2 * r * k / (opt.bases - 1), h);
    if (s == 0.0) s = 0.0;
    if (bases.empty() || s != bases.back()) bases.push_back(s);
  }
  auto us = offset_ladder(-r, r, opt.per_base, h);

  std::vector<std::vector<std::pair<double, double>>> per(bases.size());
  std::vector<std::vector<double>> degenerate(bases.size());
  parallel_for(static_cast<std::int64_t>(bases.size()), [&](std::int64_t b) {
    double s = bases[b];
    DistanceField fs = s == 0.0 ? f : distance_transform(parallel_set(f, s));
    for (double u : us) {
      double t = snap_to_lattice(u - s, h);
      try {
        per[b].emplace_back(u, parallel_volume(fs, t));
      } catch (const DegenerateSet&) {
        degenerate[b].push_back(u);
      }
    }
  });
  std::vector<std::pair<double, double>> samples;
  std::vector<double> bases_of;
  std::vector<double> degen;
  for (std::size_t b = 0; b < bases.size(); ++b) {
    for (auto& p : per[b]) {
      samples.push_back(p);
      bases_of.push_back(bases[b]);
    }
    degen.insert(degen.end(), degenerate[b].begin(), degenerate[b].end());
  }
  AlternatingResult res;
  res.fit = fit_steiner(samples, f.geom.dim);
  res.fit.degenerate_offsets = degen;
  res.boundary_measure = minkowski_content(f).value;
  res.tau = opt.tau_factor * h * res.boundary_measure * r;
  res.holds = res.fit.max_residual <= res.tau;
  double worst = -1.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double e = std::abs(res.fit.volume_at(samples[i].first) - samples[i].second);
    if (e > worst) {
      worst = e;
      res.worst_offset = samples[i].first;
      res.worst_base = bases_of[i];
    }
  }
  return res;
}

inline AlternatingResult alternating_fit(const BinaryGrid& g, double r, const AlternatingOptions& opt = {}) {
  return alternating_fit(distance_transform(g), r, opt);
}

} // namespace reachlab
