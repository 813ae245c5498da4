#pragma once

#include <limits>
#include <unordered_map>

#include "grid.hpp"

namespace reachlab {

namespace detail {

inline constexpr std::int64_t kFar = std::numeric_limits<std::int64_t>::max() / 4;

// Base index of line `line` among all lattice lines parallel to `axis`.
inline std::int64_t line_base(const Geometry& g, int axis, std::int64_t line) {
  std::int64_t base = 0;
  for (int a = 0; a < g.dim; ++a) {
    if (a == axis) continue;
    std::int64_t c = line % g.size[a];
    line /= g.size[a];
    base += c * g.stride(a);
  }
  return base;
}

// One separable pass: lower envelope of the parabolas f(q) + (p - q)^2 along
// every line parallel to `axis`. Integer arithmetic keeps the result exact;
// ties resolve to the lower q, so the argmin is deterministic.
inline void envelope_pass(const Geometry& g, int axis, const std::vector<std::int64_t>& in_sq,
                          const std::vector<std::int64_t>* in_near, std::vector<std::int64_t>& out_sq,
                          std::vector<std::int64_t>* out_near) {
  const std::int64_t n = g.size[axis];
  const std::int64_t st = g.stride(axis);
  const std::int64_t lines = g.cell_count() / n;
  const std::int64_t block = 64;
  const std::int64_t blocks = (lines + block - 1) / block;
  parallel_for(blocks, [&](std::int64_t b) {
    std::vector<std::int64_t> f(static_cast<std::size_t>(n)), v(static_cast<std::size_t>(n));
    std::vector<double> z(static_cast<std::size_t>(n) + 1);
    std::int64_t l_end = std::min(lines, (b + 1) * block);
    for (std::int64_t l = b * block; l < l_end; ++l) {
      std::int64_t base = line_base(g, axis, l);
      for (std::int64_t q = 0; q < n; ++q) f[q] = in_sq[base + q * st];
      std::int64_t k = -1;
      for (std::int64_t q = 0; q < n; ++q) {
        if (f[q] >= kFar) continue;
        if (k < 0) {
          k = 0;
          v[0] = q;
          z[0] = -std::numeric_limits<double>::infinity();
          z[1] = std::numeric_limits<double>::infinity();
          continue;
        }
        double s = 0.0;
        while (true) {
          std::int64_t vk = v[k];
          s = static_cast<double>((f[q] + q * q) - (f[vk] + vk * vk)) / static_cast<double>(2 * (q - vk));
          if (s <= z[k]) --k; else break;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
      }
      if (k < 0) {
        for (std::int64_t p = 0; p < n; ++p) {
          out_sq[base + p * st] = kFar;
          if (out_near) (*out_near)[base + p * st] = -1;
        }
        continue;
      }
      std::int64_t j = 0;
      for (std::int64_t p = 0; p < n; ++p) {
        while (z[j + 1] < static_cast<double>(p)) ++j;
        std::int64_t vj = v[j];
        out_sq[base + p * st] = f[vj] + (p - vj) * (p - vj);
        if (out_near) (*out_near)[base + p * st] = (*in_near)[base + vj * st];
      }
    }
  });
}

} // namespace detail

//! Exact squared distance (in cell units) from every cell center to the
//! nearest feature cell center; optionally the index of that feature.
inline std::vector<std::int64_t> squared_edt(const Geometry& g, const std::vector<std::uint8_t>& feature,
                                             std::vector<std::int64_t>* nearest = nullptr) {
  const auto count = g.cell_count();
  std::vector<std::int64_t> a(static_cast<std::size_t>(count)), b(static_cast<std::size_t>(count));
  std::vector<std::int64_t> na, nb;
  if (nearest) {
    na.resize(static_cast<std::size_t>(count));
    nb.resize(static_cast<std::size_t>(count));
  }
  for (std::int64_t i = 0; i < count; ++i) {
    a[i] = feature[i] ? 0 : detail::kFar;
    if (nearest) na[i] = feature[i] ? i : -1;
  }
  for (int axis = 0; axis < g.dim; ++axis) {
    detail::envelope_pass(g, axis, a, nearest ? &na : nullptr, b, nearest ? &nb : nullptr);
    std::swap(a, b);
    if (nearest) std::swap(na, nb);
  }
  if (nearest) *nearest = std::move(na);
  return a;
}

//! Signed distance to the discrete boundary plus the nearest-boundary index.
//! `clear_sq` is the squared distance (cell units) from an occupied cell to
//! the nearest unoccupied center or the ring just outside the lattice; it
//! drives inner parallel sets.
struct DistanceField {
  Geometry geom;
  BinaryGrid source;
  std::vector<double> signed_dist;
  std::vector<std::int64_t> nearest_idx;
  std::vector<std::int64_t> dist_sq;
  std::vector<std::int64_t> clear_sq;

  double clearance(std::int64_t i) const { return std::sqrt(static_cast<double>(clear_sq[i])) * geom.spacing; }
};

inline DistanceField distance_transform(const BinaryGrid& g) {
  require_nontrivial(g, "distance_transform");
  const auto& ge = g.geom;
  const auto count = ge.cell_count();
  DistanceField f;
  f.geom = ge;
  f.source = g;
  std::vector<std::uint8_t> boundary(static_cast<std::size_t>(count), 0), empty(static_cast<std::size_t>(count), 0);
  for (std::int64_t i = 0; i < count; ++i) {
    boundary[i] = is_boundary_cell(g, i) ? 1 : 0;
    empty[i] = g.occupied(i) ? 0 : 1;
  }
  f.dist_sq = squared_edt(ge, boundary, &f.nearest_idx);
  f.clear_sq = squared_edt(ge, empty);
  f.signed_dist.resize(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    double d = std::sqrt(static_cast<double>(f.dist_sq[i])) * ge.spacing;
    f.signed_dist[i] = g.occupied(i) ? -d : d;
    if (!g.occupied(i)) {
      f.clear_sq[i] = 0;
      continue;
    }
    auto c = ge.coords(i);
    for (int a = 0; a < ge.dim; ++a) {
      std::int64_t ring = std::min(c[a] + 1, ge.size[a] - c[a]);
      f.clear_sq[i] = std::min(f.clear_sq[i], ring * ring);
    }
  }
  return f;
}

//! (s/h)^2, snapped to the nearest integer when s is a lattice multiple up to
//! rounding, so thresholds at s = k*h behave exactly.
inline double lattice_threshold(double s, double h) {
  double t = (s / h) * (s / h);
  double r = std::round(t);
  if (std::abs(t - r) <= 1e-9 * std::max(1.0, t)) return r;
  return t;
}

inline double snap_to_lattice(double s, double h) { return std::round(s / h) * h; }

//! A_s: outer offset for s > 0, inner (erosion) for s < 0, identity at 0.
inline BinaryGrid parallel_set(const DistanceField& f, double s) {
  if (!std::isfinite(s)) throw InvalidArgument("parallel_set: offset must be finite");
  if (s == 0.0) return f.source;
  BinaryGrid out(f.geom);
  const auto count = f.geom.cell_count();
  double t = lattice_threshold(s, f.geom.spacing);
  std::int64_t kept = 0;
  if (s > 0.0) {
    for (std::int64_t i = 0; i < count; ++i) {
      bool in = f.source.occupied(i) || static_cast<double>(f.dist_sq[i]) <= t;
      if (in && f.geom.on_edge(i))
        throw PaddingError("outer parallel set at s = " + format_double(s) + " reaches the lattice edge");
      out.cells[i] = in;
      kept += in;
    }
  } else {
    for (std::int64_t i = 0; i < count; ++i) {
      bool in = static_cast<double>(f.clear_sq[i]) > t;
      out.cells[i] = in;
      kept += in;
    }
    if (kept == 0) throw DegenerateSet(s);
  }
  return out;
}

inline BinaryGrid parallel_set(const BinaryGrid& g, double s) {
  if (s == 0.0) {
    require_nontrivial(g, "parallel_set");
    return g;
  }
  return parallel_set(distance_transform(g), s);
}

//! Largest outer offset is strictly below this (distance from the set to
//! the outermost lattice layer).
inline double outer_margin(const DistanceField& f) {
  double m = std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < f.geom.cell_count(); ++i) {
    if (!f.geom.on_edge(i)) continue;
    double d = f.source.occupied(i) ? 0.0 : std::sqrt(static_cast<double>(f.dist_sq[i])) * f.geom.spacing;
    m = std::min(m, d);
  }
  return m;
}

//! Largest clearance; inner offsets with |s| at or above it are empty.
inline double max_clearance(const DistanceField& f) {
  std::int64_t best = 0;
  for (auto c : f.clear_sq) best = std::max(best, c);
  return std::sqrt(static_cast<double>(best)) * f.geom.spacing;
}

//! Continuum inradius estimate: the deepest center sits half a cell inside
//! the last unoccupied center's cell face.
inline double inradius(const DistanceField& f) { return std::max(0.0, max_clearance(f) - 0.5 * f.geom.spacing); }

//! Lattice Hausdorff distance between the occupied center sets.
inline double hausdorff_distance(const BinaryGrid& a, const BinaryGrid& b) {
  require_same_geometry(a, b);
  validate(a);
  if (a.occupied_count() == 0 || b.occupied_count() == 0) throw InvalidArgument("hausdorff_distance: empty grid");
  auto da = squared_edt(a.geom, a.cells);
  auto db = squared_edt(b.geom, b.cells);
  std::int64_t worst = 0;
  for (std::int64_t i = 0; i < a.geom.cell_count(); ++i) {
    if (a.occupied(i)) worst = std::max(worst, db[i]);
    if (b.occupied(i)) worst = std::max(worst, da[i]);
  }
  return std::sqrt(static_cast<double>(worst)) * a.geom.spacing;
}

// ---- sub-cell interfaces --------------------------------------------------

//! Level function that places the boundary of the occupied set half a cell
//! beyond the last occupied center: positive inside, measured in length.
inline double interface_level(const DistanceField& f, std::int64_t i) {
  double h = f.geom.spacing;
  if (f.source.occupied(i)) return std::sqrt(static_cast<double>(f.clear_sq[i])) * h - 0.5 * h;
  return -(std::sqrt(static_cast<double>(f.dist_sq[i])) * h - 0.5 * h);
}

//! Points where the level function crosses `depth` along lattice edges;
//! the sub-cell boundary of the erosion by `depth`.
inline std::vector<Point> interface_points(const DistanceField& f, double depth) {
  std::vector<Point> pts;
  const auto& g = f.geom;
  for (std::int64_t i = 0; i < g.cell_count(); ++i) {
    double li = interface_level(f, i);
    if (!(li > depth)) continue;
    Point pi = g.center(i);
    for_each_face_neighbor(g, i, [&](std::int64_t nb) {
      double ln = interface_level(f, nb);
      if (ln > depth) return;
      double w = (li - depth) / (li - ln);
      pts.push_back(pi + w * (g.center(nb) - pi));
    });
  }
  return pts;
}

//! Uniform bucket index for nearest-point queries.
class PointIndex {
public:
  PointIndex(const std::vector<Point>& pts, double cell) : pts_(pts), cell_(cell) {
    if (pts.empty()) throw InvalidArgument("PointIndex: empty point set");
    for (std::size_t i = 0; i < pts.size(); ++i) buckets_[key(bucket_of(pts[i]))].push_back(i);
  }

  double nearest_distance(const Point& p) const {
    auto c = bucket_of(p);
    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t ring = 0;; ++ring) {
      for (std::int64_t dx = -ring; dx <= ring; ++dx)
        for (std::int64_t dy = -ring; dy <= ring; ++dy)
          for (std::int64_t dz = -ring; dz <= ring; ++dz) {
            if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
            auto it = buckets_.find(key({c[0] + dx, c[1] + dy, c[2] + dz}));
            if (it == buckets_.end()) continue;
            for (auto j : it->second) best = std::min(best, norm(pts_[j] - p));
          }
      if (best <= static_cast<double>(ring) * cell_) return best;
      if (ring > 1 << 20) return best;
    }
  }

private:
  std::array<std::int64_t, 3> bucket_of(const Point& p) const {
    return {static_cast<std::int64_t>(std::floor(p[0] / cell_)), static_cast<std::int64_t>(std::floor(p[1] / cell_)),
            static_cast<std::int64_t>(std::floor(p[2] / cell_))};
  }
  static std::uint64_t key(const std::array<std::int64_t, 3>& c) {
    auto u = [](std::int64_t v) { return static_cast<std::uint64_t>(v + (1 << 20)) & 0x1FFFFF; };
    return u(c[0]) | (u(c[1]) << 21) | (u(c[2]) << 42);
  }

  const std::vector<Point>& pts_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

//! Hausdorff distance between the erosions at depths d1 < d2 of a convex
//! body, from their sub-cell interfaces. For nested convex bodies the
//! supremum is attained on the outer interface.
inline double interface_hausdorff(const DistanceField& f, double d1, double d2) {
  if (d2 < d1) std::swap(d1, d2);
  auto outer = interface_points(f, d1);
  auto inner = interface_points(f, d2);
  if (outer.empty() || inner.empty()) throw DegenerateSet(-d2);
  PointIndex idx(inner, 2.0 * f.geom.spacing);
  std::vector<double> best(outer.size());
  parallel_for(static_cast<std::int64_t>(outer.size()), [&](std::int64_t i) { best[i] = idx.nearest_distance(outer[i]); });
  double worst = 0.0;
  for (double b : best) worst = std::max(worst, b);
  return worst;
}

} // namespace reachlab
