#pragma once

#include <map>
#include <optional>

#include "grid.hpp"

namespace reachlab {

enum class ShapeKind { box, disk, ball, box_annulus, rounded_box, torus };

inline const char* to_string(ShapeKind k) {
  switch (k) {
  case ShapeKind::box: return "box";
  case ShapeKind::disk: return "disk";
  case ShapeKind::ball: return "ball";
  case ShapeKind::box_annulus: return "box_annulus";
  case ShapeKind::rounded_box: return "rounded_box";
  case ShapeKind::torus: return "torus";
  }
  return "?";
}

inline ShapeKind shape_kind_from_string(const std::string& s) {
  static const std::map<std::string, ShapeKind> names{{"box", ShapeKind::box},
                                                      {"disk", ShapeKind::disk},
                                                      {"ball", ShapeKind::ball},
                                                      {"box_annulus", ShapeKind::box_annulus},
                                                      {"rounded_box", ShapeKind::rounded_box},
                                                      {"torus", ShapeKind::torus}};
  auto it = names.find(s);
  if (it == names.end()) throw InvalidArgument("unknown shape kind '" + s + "'");
  return it->second;
}

//! Fixture description. Only the fields relevant to `kind` are read:
//! box/rounded_box use half_width (rounded_box may have zero core widths,
//! e.g. a stadium), disk/ball use radius, box_annulus uses inner < outer,
//! torus uses radius (major) and tube (minor).
struct ShapeSpec {
  ShapeKind kind = ShapeKind::disk;
  int dim = 2;
  std::array<double, 3> half_width{1.0, 1.0, 1.0};
  double radius = 1.0;
  double inner = 0.5;
  double outer = 1.0;
  double rounding = 0.5;
  double tube = 0.3;
  double h = 0.01;      // grid spacing
  double s_max = 0.0;   // largest outer offset the grid must hold

  static ShapeSpec box(int dim, double w) {
    ShapeSpec s;
    s.kind = ShapeKind::box;
    s.dim = dim;
    s.half_width = {w, w, w};
    return s;
  }
  static ShapeSpec disk(double r) {
    ShapeSpec s;
    s.kind = ShapeKind::disk;
    s.radius = r;
    return s;
  }
  static ShapeSpec ball(double r) {
    ShapeSpec s;
    s.kind = ShapeKind::ball;
    s.dim = 3;
    s.radius = r;
    return s;
  }
  static ShapeSpec box_annulus(double a, double b) {
    ShapeSpec s;
    s.kind = ShapeKind::box_annulus;
    s.inner = a;
    s.outer = b;
    return s;
  }
  static ShapeSpec rounded_box(int dim, std::array<double, 3> w, double r) {
    ShapeSpec s;
    s.kind = ShapeKind::rounded_box;
    s.dim = dim;
    s.half_width = w;
    s.rounding = r;
    return s;
  }
  static ShapeSpec torus(double major, double minor) {
    ShapeSpec s;
    s.kind = ShapeKind::torus;
    s.dim = 3;
    s.radius = major;
    s.tube = minor;
    return s;
  }
  ShapeSpec& with_grid(double spacing, double offset_max) {
    h = spacing;
    s_max = offset_max;
    return *this;
  }
};

inline void validate(const ShapeSpec& s) {
  auto pos = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be positive");
  };
  if (s.dim != 2 && s.dim != 3) throw InvalidArgument("shape dimension must be 2 or 3");
  switch (s.kind) {
  case ShapeKind::box:
    for (int a = 0; a < s.dim; ++a) pos(s.half_width[a], "box half-width");
    break;
  case ShapeKind::disk:
    if (s.dim != 2) throw InvalidArgument("disk is two-dimensional");
    pos(s.radius, "radius");
    break;
  case ShapeKind::ball:
    if (s.dim != 3) throw InvalidArgument("ball is three-dimensional");
    pos(s.radius, "radius");
    break;
  case ShapeKind::box_annulus:
    if (s.dim != 2) throw InvalidArgument("box_annulus is two-dimensional");
    pos(s.inner, "inner half-width");
    if (!(s.inner < s.outer)) throw InvalidArgument("box_annulus requires 0 < a < b");
    break;
  case ShapeKind::rounded_box:
    pos(s.rounding, "rounding radius");
    for (int a = 0; a < s.dim; ++a)
      if (!(s.half_width[a] >= 0.0)) throw InvalidArgument("rounded_box core half-widths must be >= 0");
    break;
  case ShapeKind::torus:
    if (s.dim != 3) throw InvalidArgument("torus is three-dimensional");
    pos(s.tube, "tube radius");
    if (!(s.tube < s.radius)) throw InvalidArgument("torus requires tube < major radius");
    break;
  }
}

//! One polynomial branch V(s) = sum c_k s^k valid on [lo, hi].
struct SteinerBranch {
  std::vector<double> coeffs;
  double lo = 0.0;
  double hi = 0.0;
};

struct GroundTruth {
  int dim = 2;
  std::vector<SteinerBranch> steiner; // outer branch first
  std::optional<double> reach_of_set;
  std::optional<double> reach_of_boundary;
  int euler_char = 1;
  std::optional<std::vector<double>> quermass;

  double volume_at(double s) const {
    for (const auto& b : steiner)
      if (s >= b.lo && s <= b.hi) {
        double v = 0.0, p = 1.0;
        for (double c : b.coeffs) {
          v += c * p;
          p *= s;
        }
        return v;
      }
    throw InvalidArgument("no Steiner branch covers s = " + format_double(s));
  }
};

namespace detail {

// Elementary symmetric polynomials e_0..e_n of the values.
inline std::vector<double> elementary_symmetric(const std::vector<double>& x) {
  std::vector<double> e(x.size() + 1, 0.0);
  e[0] = 1.0;
  for (double v : x)
    for (std::size_t j = e.size() - 1; j >= 1; --j) e[j] += v * e[j - 1];
  return e;
}

// V(box + B_s) = sum_k omega_k s^k e_{n-k}(side lengths).
inline std::vector<double> box_outer_coeffs(int n, const std::array<double, 3>& w) {
  std::vector<double> len;
  for (int a = 0; a < n; ++a) len.push_back(2.0 * w[a]);
  auto e = elementary_symmetric(len);
  std::vector<double> c(n + 1);
  for (int k = 0; k <= n; ++k) c[k] = unit_ball_volume(k) * e[n - k];
  return c;
}

// prod (L_i + 2s): the inner branch of a box.
inline std::vector<double> box_inner_coeffs(int n, const std::array<double, 3>& w) {
  std::vector<double> c{1.0};
  for (int a = 0; a < n; ++a) {
    std::vector<double> next(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k] += c[k] * 2.0 * w[a];
      next[k + 1] += c[k] * 2.0;
    }
    c = next;
  }
  return c;
}

// Coefficients of p(r + s) in s.
inline std::vector<double> shift_polynomial(const std::vector<double>& p, double r) {
  std::vector<double> out(p.size(), 0.0);
  for (std::size_t k = 0; k < p.size(); ++k)
    for (std::size_t j = 0; j <= k; ++j)
      out[j] += p[k] * binomial(static_cast<int>(k), static_cast<int>(j)) * std::pow(r, static_cast<double>(k - j));
  return out;
}

inline double box_distance_sq(const Point& x, const std::array<double, 3>& w, int dim) {
  double d = 0.0;
  for (int a = 0; a < dim; ++a) {
    double e = std::abs(x[a]) - w[a];
    if (e > 0.0) d += e * e;
  }
  return d;
}

} // namespace detail

//! Analytic quantities for a fixture.
inline GroundTruth ground_truth(const ShapeSpec& s) {
  validate(s);
  GroundTruth t;
  t.dim = s.dim;
  const double inf = std::numeric_limits<double>::infinity();
  const int n = s.dim;
  switch (s.kind) {
  case ShapeKind::box: {
    double wmin = *std::min_element(s.half_width.begin(), s.half_width.begin() + n);
    t.steiner.push_back({detail::box_outer_coeffs(n, s.half_width), 0.0, inf});
    t.steiner.push_back({detail::box_inner_coeffs(n, s.half_width), -wmin, 0.0});
    t.reach_of_set = inf;
    t.reach_of_boundary = 0.0;
    break;
  }
  case ShapeKind::disk:
  case ShapeKind::ball: {
    std::vector<double> c(n + 1);
    for (int k = 0; k <= n; ++k) c[k] = unit_ball_volume(n) * binomial(n, k) * std::pow(s.radius, n - k);
    t.steiner.push_back({c, -s.radius, inf});
    t.reach_of_set = inf;
    t.reach_of_boundary = s.radius;
    break;
  }
  case ShapeKind::box_annulus: {
    double a = s.inner, b = s.outer;
    t.steiner.push_back({{4.0 * (b * b - a * a), 8.0 * (b + a), std::numbers::pi - 4.0}, 0.0, a});
    t.reach_of_set = 0.0;
    t.reach_of_boundary = 0.0;
    t.euler_char = 0;
    break;
  }
  case ShapeKind::rounded_box: {
    auto c = detail::shift_polynomial(detail::box_outer_coeffs(n, s.half_width), s.rounding);
    t.steiner.push_back({c, -s.rounding, inf});
    t.reach_of_set = inf;
    t.reach_of_boundary = s.rounding;
    break;
  }
  case ShapeKind::torus:
    t.euler_char = 0;
    t.reach_of_boundary = s.tube;
    break;
  }
  if (!t.steiner.empty()) {
    std::vector<double> w;
    for (int k = 0; k <= n; ++k) w.push_back(t.steiner.front().coeffs[k] / binomial(n, k));
    t.quermass = w;
  }
  return t;
}

//! Exact membership of a point in the fixture (grid kinds only).
inline bool contains(const ShapeSpec& s, const Point& x) {
  switch (s.kind) {
  case ShapeKind::box:
    for (int a = 0; a < s.dim; ++a)
      if (std::abs(x[a]) > s.half_width[a]) return false;
    return true;
  case ShapeKind::disk:
  case ShapeKind::ball: return dot(x, x) <= s.radius * s.radius;
  case ShapeKind::box_annulus: {
    double m = std::max(std::abs(x[0]), std::abs(x[1]));
    return m <= s.outer && m > s.inner;
  }
  case ShapeKind::rounded_box: return detail::box_distance_sq(x, s.half_width, s.dim) <= s.rounding * s.rounding;
  case ShapeKind::torus: {
    double q = std::hypot(x[0], x[1]) - s.radius;
    return q * q + x[2] * x[2] <= s.tube * s.tube;
  }
  }
  return false;
}

inline double half_extent(const ShapeSpec& s, int axis) {
  switch (s.kind) {
  case ShapeKind::box: return s.half_width[axis];
  case ShapeKind::disk:
  case ShapeKind::ball: return s.radius;
  case ShapeKind::box_annulus: return s.outer;
  case ShapeKind::rounded_box: return s.half_width[axis] + s.rounding;
  case ShapeKind::torus: return axis == 2 ? s.tube : s.radius + s.tube;
  }
  return 0.0;
}

inline double smallest_feature(const ShapeSpec& s) {
  switch (s.kind) {
  case ShapeKind::box: return 2.0 * *std::min_element(s.half_width.begin(), s.half_width.begin() + s.dim);
  case ShapeKind::disk:
  case ShapeKind::ball: return 2.0 * s.radius;
  case ShapeKind::box_annulus: return std::min(2.0 * s.inner, s.outer - s.inner);
  case ShapeKind::rounded_box: return 2.0 * s.rounding;
  case ShapeKind::torus: return 2.0 * s.tube;
  }
  return 0.0;
}

//! Cell-center rasterization centred on the origin, padded by
//! ceil(s_max/h) + 2 guard cells beyond the shape on every side.
inline std::pair<BinaryGrid, GroundTruth> make_grid(const ShapeSpec& s) {
  validate(s);
  if (!(s.h > 0.0) || !std::isfinite(s.h)) throw InvalidArgument("grid spacing must be positive");
  if (!(s.s_max >= 0.0)) throw InvalidArgument("s_max must be >= 0");
  if (smallest_feature(s) / s.h < 8.0 - 1e-9)
    throw InvalidArgument("resolution too coarse: fewer than 8 cells across the smallest feature");
  Geometry g;
  g.dim = s.dim;
  g.spacing = s.h;
  std::int64_t guard = static_cast<std::int64_t>(std::ceil(s.s_max / s.h - 1e-9)) + 2;
  for (int a = 0; a < s.dim; ++a) {
    std::int64_t half = static_cast<std::int64_t>(std::ceil(half_extent(s, a) / s.h - 1e-9)) + guard;
    g.size[a] = 2 * half;
    g.origin[a] = (-static_cast<double>(half) + 0.5) * s.h;
  }
  BinaryGrid grid(g);
  parallel_for(g.cell_count(), [&](std::int64_t i) { grid.cells[i] = contains(s, g.center(i)) ? 1 : 0; });
  return {std::move(grid), ground_truth(s)};
}

// ---- curves ------------------------------------------------------------

//! Points with unit outer normals. `loops` partitions the points into
//! closed curves (n = 2); `flagged` marks points whose normal is not unique.
struct PointedSample {
  int dim = 2;
  std::vector<Point> points;
  std::vector<Point> normals;
  std::vector<bool> flagged;
  std::vector<std::vector<std::int64_t>> loops;

  std::size_t size() const { return points.size(); }
  bool any_flagged() const {
    for (bool f : flagged)
      if (f) return true;
    return false;
  }
};

inline void validate(const PointedSample& ps) {
  if (ps.points.size() < 4) throw InvalidArgument("pointed sample needs at least 4 points");
  if (ps.normals.size() != ps.points.size() || ps.flagged.size() != ps.points.size())
    throw InvalidArgument("pointed sample: normals/flags do not match points");
  for (const auto& nu : ps.normals)
    if (std::abs(norm(nu) - 1.0) > 1e-12) throw InvalidArgument("pointed sample: normal is not unit length");
}

namespace detail {

// A piece of a closed curve: segment or circular arc, traversed CCW.
struct CurvePiece {
  bool arc = false;
  Point a{}, b{};          // segment endpoints
  Point c{};               // arc center
  double r = 0.0, t0 = 0.0, t1 = 0.0;
  Point seg_normal{};
  double length() const { return arc ? r * (t1 - t0) : norm(b - a); }
  std::pair<Point, Point> at(double u) const {
    if (arc) {
      double t = t0 + u / r;
      Point d{std::cos(t), std::sin(t), 0.0};
      return {c + r * d, d};
    }
    double L = length();
    return {a + (u / L) * (b - a), seg_normal};
  }
};

inline void sample_loop(PointedSample& ps, const std::vector<CurvePiece>& pieces, std::int64_t m, bool corners) {
  double total = 0.0;
  for (const auto& p : pieces) total += p.length();
  std::vector<std::int64_t> loop;
  if (corners) {
    // Polygon: every corner is a sample point, flagged.
    std::int64_t used = 0;
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      std::int64_t cnt = k + 1 == pieces.size()
                             ? m - used
                             : static_cast<std::int64_t>(std::llround(static_cast<double>(m) * pieces[k].length() / total));
      used += cnt;
      for (std::int64_t j = 0; j < cnt; ++j) {
        auto [p, nu] = pieces[k].at(pieces[k].length() * static_cast<double>(j) / static_cast<double>(cnt));
        loop.push_back(static_cast<std::int64_t>(ps.points.size()));
        ps.points.push_back(p);
        ps.normals.push_back(nu);
        ps.flagged.push_back(j == 0);
      }
    }
  } else {
    std::size_t k = 0;
    double start = 0.0;
    for (std::int64_t j = 0; j < m; ++j) {
      double u = total * static_cast<double>(j) / static_cast<double>(m);
      while (k + 1 < pieces.size() && u >= start + pieces[k].length()) {
        start += pieces[k].length();
        ++k;
      }
      auto [p, nu] = pieces[k].at(std::min(u - start, pieces[k].length()));
      loop.push_back(static_cast<std::int64_t>(ps.points.size()));
      ps.points.push_back(p);
      ps.normals.push_back(nu);
      ps.flagged.push_back(false);
    }
  }
  ps.loops.push_back(loop);
}

inline std::vector<CurvePiece> rect_pieces(double wx, double wy, bool clockwise) {
  Point c0{wx, -wy, 0}, c1{wx, wy, 0}, c2{-wx, wy, 0}, c3{-wx, -wy, 0};
  std::vector<CurvePiece> ps(4);
  ps[0].a = c0; ps[0].b = c1; ps[0].seg_normal = {1, 0, 0};
  ps[1].a = c1; ps[1].b = c2; ps[1].seg_normal = {0, 1, 0};
  ps[2].a = c2; ps[2].b = c3; ps[2].seg_normal = {-1, 0, 0};
  ps[3].a = c3; ps[3].b = c0; ps[3].seg_normal = {0, -1, 0};
  if (clockwise) {
    // Hole boundary: reverse traversal, normals point into the hole.
    std::vector<CurvePiece> rev;
    for (int k = 3; k >= 0; --k) {
      CurvePiece p = ps[k];
      std::swap(p.a, p.b);
      p.seg_normal = -1.0 * p.seg_normal;
      rev.push_back(p);
    }
    return rev;
  }
  return ps;
}

} // namespace detail

//! m arc-length-uniform boundary samples with analytic outer normals (n = 2).
//! Polygonal kinds put a flagged sample on every corner.
inline PointedSample make_curve(const ShapeSpec& s, std::int64_t m) {
  validate(s);
  if (s.dim != 2) throw InvalidArgument("make_curve: two-dimensional kinds only");
  if (m < 16) throw InvalidArgument("make_curve: need at least 16 samples");
  PointedSample ps;
  ps.dim = 2;
  const double pi = std::numbers::pi;
  switch (s.kind) {
  case ShapeKind::disk: {
    detail::CurvePiece arc;
    arc.arc = true;
    arc.r = s.radius;
    arc.t0 = 0.0;
    arc.t1 = 2.0 * pi;
    detail::sample_loop(ps, {arc}, m, false);
    break;
  }
  case ShapeKind::box:
    detail::sample_loop(ps, detail::rect_pieces(s.half_width[0], s.half_width[1], false), m, true);
    break;
  case ShapeKind::box_annulus: {
    std::int64_t mo = std::llround(static_cast<double>(m) * s.outer / (s.outer + s.inner));
    detail::sample_loop(ps, detail::rect_pieces(s.outer, s.outer, false), mo, true);
    detail::sample_loop(ps, detail::rect_pieces(s.inner, s.inner, true), m - mo, true);
    break;
  }
  case ShapeKind::rounded_box: {
    double wx = s.half_width[0], wy = s.half_width[1], r = s.rounding;
    std::vector<detail::CurvePiece> pieces;
    auto seg = [&](Point a, Point b, Point nu) {
      if (norm(b - a) == 0.0) return;
      detail::CurvePiece p;
      p.a = a;
      p.b = b;
      p.seg_normal = nu;
      pieces.push_back(p);
    };
    auto arc = [&](Point c, double t0) {
      detail::CurvePiece p;
      p.arc = true;
      p.c = c;
      p.r = r;
      p.t0 = t0;
      p.t1 = t0 + pi / 2;
      pieces.push_back(p);
    };
    seg({wx + r, -wy, 0}, {wx + r, wy, 0}, {1, 0, 0});
    arc({wx, wy, 0}, 0.0);
    seg({wx, wy + r, 0}, {-wx, wy + r, 0}, {0, 1, 0});
    arc({-wx, wy, 0}, pi / 2);
    seg({-wx - r, wy, 0}, {-wx - r, -wy, 0}, {-1, 0, 0});
    arc({-wx, -wy, 0}, pi);
    seg({-wx, -wy - r, 0}, {wx, -wy - r, 0}, {0, -1, 0});
    arc({wx, -wy, 0}, 1.5 * pi);
    detail::sample_loop(ps, pieces, m, false);
    break;
  }
  default: throw InvalidArgument(std::string("make_curve: unsupported kind ") + to_string(s.kind));
  }
  return ps;
}

// ---- meshes --------------------------------------------------------------

struct TriMesh {
  std::vector<Point> vertices;
  std::vector<Point> normals; // optional, one per vertex
  std::vector<std::array<std::int64_t, 3>> faces;
};

//! V - E + F; throws if some edge is not shared by exactly two faces with
//! opposite orientation.
inline std::int64_t mesh_euler_characteristic(const TriMesh& m) {
  std::map<std::pair<std::int64_t, std::int64_t>, int> directed;
  for (const auto& f : m.faces)
    for (int k = 0; k < 3; ++k) {
      auto key = std::make_pair(f[k], f[(k + 1) % 3]);
      if (++directed[key] > 1) throw InvalidArgument("mesh: directed edge used twice (non-manifold or misoriented)");
    }
  for (const auto& [e, cnt] : directed)
    if (!directed.count({e.second, e.first})) throw InvalidArgument("mesh: open boundary edge");
  std::int64_t edges = static_cast<std::int64_t>(directed.size()) / 2;
  return static_cast<std::int64_t>(m.vertices.size()) - edges + static_cast<std::int64_t>(m.faces.size());
}

namespace detail {

inline TriMesh icosphere(double radius, int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Point> v{{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                       {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p = normalized(p);
  std::vector<std::array<std::int64_t, 3>> f{{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> mid;
    auto midpoint = [&](std::int64_t a, std::int64_t b) {
      auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back(normalized(0.5 * (v[a] + v[b])));
      auto id = static_cast<std::int64_t>(v.size()) - 1;
      mid[key] = id;
      return id;
    };
    std::vector<std::array<std::int64_t, 3>> next;
    for (const auto& tri : f) {
      auto a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]), c = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  TriMesh m;
  for (const auto& p : v) {
    m.vertices.push_back(radius * p);
    m.normals.push_back(p);
  }
  m.faces = std::move(f);
  return m;
}

inline TriMesh torus_mesh(double R, double rho, int nu, int nv) {
  TriMesh m;
  const double pi = std::numbers::pi;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      double u = 2 * pi * i / nu, w = 2 * pi * j / nv;
      Point d{std::cos(w) * std::cos(u), std::cos(w) * std::sin(u), std::sin(w)};
      m.vertices.push_back({(R + rho * std::cos(w)) * std::cos(u), (R + rho * std::cos(w)) * std::sin(u), rho * std::sin(w)});
      m.normals.push_back(d);
    }
  auto id = [&](int i, int j) { return static_cast<std::int64_t>(((i + nu) % nu) * nv + (j + nv) % nv); };
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      m.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return m;
}

// Cube-surface lattice mapped onto box + B_r: q on the outer box surface goes
// to clamp(q) + r * unit(q - clamp(q)).
inline TriMesh rounded_box_mesh(const std::array<double, 3>& w, double r, int cells) {
  TriMesh m;
  std::map<std::array<int, 3>, std::int64_t> ids;
  auto vertex = [&](std::array<int, 3> c) {
    auto it = ids.find(c);
    if (it != ids.end()) return it->second;
    Point q{}, cl{};
    for (int a = 0; a < 3; ++a) {
      double ext = w[a] + r;
      q[a] = -ext + 2.0 * ext * c[a] / cells;
      cl[a] = std::clamp(q[a], -w[a], w[a]);
    }
    Point d = normalized(q - cl);
    m.vertices.push_back(cl + r * d);
    m.normals.push_back(d);
    auto id = static_cast<std::int64_t>(m.vertices.size()) - 1;
    ids[c] = id;
    return id;
  };
  for (int axis = 0; axis < 3; ++axis)
    for (int side = 0; side < 2; ++side) {
      int u = (axis + 1) % 3, v = (axis + 2) % 3;
      for (int i = 0; i < cells; ++i)
        for (int j = 0; j < cells; ++j) {
          auto corner = [&](int di, int dj) {
            std::array<int, 3> c{};
            c[axis] = side * cells;
            c[u] = i + di;
            c[v] = j + dj;
            return vertex(c);
          };
          auto a = corner(0, 0), b = corner(1, 0), c = corner(1, 1), d = corner(0, 1);
          // (u, v, axis) is right-handed, so CCW in (u, v) faces +axis.
          if (side == 1) {
            m.faces.push_back({a, b, c});
            m.faces.push_back({a, c, d});
          } else {
            m.faces.push_back({a, c, b});
            m.faces.push_back({a, d, c});
          }
        }
    }
  return m;
}

} // namespace detail

struct MeshOptions {
  int subdivisions = 3; // icosphere
  int segments = 64;    // torus major direction; minor gets a proportional share
  int cells = 24;       // rounded_box lattice per cube face
};

//! Closed, oriented, manifold triangle mesh with analytic vertex normals.
inline std::pair<TriMesh, GroundTruth> make_mesh(const ShapeSpec& s, const MeshOptions& opt = {}) {
  validate(s);
  TriMesh m;
  switch (s.kind) {
  case ShapeKind::ball: m = detail::icosphere(s.radius, opt.subdivisions); break;
  case ShapeKind::torus: {
    int nv = std::max(8, static_cast<int>(std::lround(opt.segments * s.tube / s.radius * 2.0)));
    m = detail::torus_mesh(s.radius, s.tube, opt.segments, nv);
    break;
  }
  case ShapeKind::rounded_box:
    if (s.dim != 3) throw InvalidArgument("make_mesh: rounded_box mesh needs dim 3");
    m = detail::rounded_box_mesh(s.half_width, s.rounding, opt.cells);
    break;
  default: throw InvalidArgument(std::string("make_mesh: unsupported kind ") + to_string(s.kind));
  }
  mesh_euler_characteristic(m); // closed-manifold check
  return {std::move(m), ground_truth(s)};
}

//! Mesh vertices with their analytic normals as a pointed sample (n = 3).
inline PointedSample mesh_sample(const TriMesh& m) {
  if (m.normals.size() != m.vertices.size()) throw InvalidArgument("mesh_sample: mesh carries no vertex normals");
  PointedSample ps;
  ps.dim = 3;
  ps.points = m.vertices;
  ps.normals = m.normals;
  ps.flagged.assign(m.vertices.size(), false);
  return ps;
}

} // namespace reachlab
