#pragma once

#include <map>

#include "shapes.hpp"
#include "steiner.hpp"

namespace reachlab {

//! e_j(kappa) / binom(k, j): equals c^j when every argument is c.
inline double normalized_symmetric(const std::vector<double>& kappa, int j) {
  const int k = static_cast<int>(kappa.size());
  if (j < 0 || j > k) throw InvalidArgument("normalized_symmetric: j out of range");
  auto e = detail::elementary_symmetric(kappa);
  return e[static_cast<std::size_t>(j)] / binomial(k, j);
}

//! Curvature data of a closed polygonal curve (dim 2) or triangle mesh (dim 3).
struct DiscreteCurvature {
  int dim = 2;
  std::vector<double> turning;      // per vertex, polylines
  std::vector<double> angle_defect; // per vertex, meshes
  std::vector<std::array<std::int64_t, 2>> edges;
  std::vector<double> edge_length;
  std::vector<double> dihedral;     // per edge, meshes; positive where convex
  double boundary_measure = 0.0;    // length or area
  double enclosed_volume = 0.0;
};

namespace detail {

template <class F>
double ordered_sum(std::int64_t count, F&& term) {
  std::vector<double> parts(static_cast<std::size_t>(count));
  parallel_for(count, [&](std::int64_t i) { parts[i] = term(i); });
  CompensatedSum s;
  for (double p : parts) s.add(p);
  return s.value();
}

inline double corner_angle(const Point& at, const Point& p, const Point& q) {
  Point a = p - at, b = q - at;
  return std::atan2(norm(cross(a, b)), dot(a, b));
}

} // namespace detail

inline DiscreteCurvature curvature_of_polyline(const PointedSample& ps) {
  validate(ps);
  if (ps.dim != 2) throw InvalidArgument("curvature_of_polyline: planar curves only");
  if (ps.loops.empty()) throw InvalidArgument("curvature_of_polyline: carrier is not closed");
  DiscreteCurvature dc;
  dc.dim = 2;
  dc.turning.assign(ps.size(), 0.0);
  for (const auto& loop : ps.loops) {
    if (loop.size() < 3) throw InvalidArgument("curvature_of_polyline: loop with fewer than three vertices");
    const std::size_t L = loop.size();
    for (std::size_t k = 0; k < L; ++k) {
      const Point& prev = ps.points[loop[(k + L - 1) % L]];
      const Point& cur = ps.points[loop[k]];
      const Point& next = ps.points[loop[(k + 1) % L]];
      Point ein = cur - prev, eout = next - cur;
      if (norm(eout) == 0.0) throw InvalidArgument("curvature_of_polyline: zero-length edge");
      double ang = std::atan2(ein[0] * eout[1] - ein[1] * eout[0], dot(ein, eout));
      if (std::abs(ang) >= std::numbers::pi) throw InvalidArgument("curvature_of_polyline: curve reverses on itself");
      dc.turning[loop[k]] = ang;
      dc.edges.push_back({loop[k], loop[(k + 1) % L]});
      dc.edge_length.push_back(norm(eout));
    }
  }
  const auto E = static_cast<std::int64_t>(dc.edges.size());
  dc.boundary_measure = detail::ordered_sum(E, [&](std::int64_t e) { return dc.edge_length[e]; });
  dc.enclosed_volume = 0.5 * detail::ordered_sum(E, [&](std::int64_t e) {
    const Point& a = ps.points[dc.edges[e][0]];
    const Point& b = ps.points[dc.edges[e][1]];
    return a[0] * b[1] - a[1] * b[0];
  });
  if (dc.enclosed_volume <= 0.0) throw InvalidArgument("curvature_of_polyline: loops are not oriented outward");
  return dc;
}

inline DiscreteCurvature curvature_of_mesh(const TriMesh& m) {
  mesh_euler_characteristic(m); // manifold and consistently oriented, or throws
  DiscreteCurvature dc;
  dc.dim = 3;
  const auto F = static_cast<std::int64_t>(m.faces.size());
  std::vector<Point> fn(m.faces.size());
  std::vector<double> farea(m.faces.size());
  for (std::int64_t f = 0; f < F; ++f) {
    const auto& t = m.faces[f];
    Point c = cross(m.vertices[t[1]] - m.vertices[t[0]], m.vertices[t[2]] - m.vertices[t[0]]);
    double len = norm(c);
    if (len == 0.0) throw InvalidArgument("curvature_of_mesh: degenerate face");
    fn[f] = (1.0 / len) * c;
    farea[f] = 0.5 * len;
  }
  dc.enclosed_volume = detail::ordered_sum(F, [&](std::int64_t f) {
    const auto& t = m.faces[f];
    return dot(m.vertices[t[0]], cross(m.vertices[t[1]], m.vertices[t[2]])) / 6.0;
  });
  if (dc.enclosed_volume <= 0.0) throw InvalidArgument("curvature_of_mesh: faces are not oriented outward");
  dc.boundary_measure = detail::ordered_sum(F, [&](std::int64_t f) { return farea[f]; });

  // Corner angles per vertex in face order, then defects.
  std::vector<CompensatedSum> angles(m.vertices.size());
  for (const auto& t : m.faces)
    for (int c = 0; c < 3; ++c)
      angles[t[c]].add(detail::corner_angle(m.vertices[t[c]], m.vertices[t[(c + 1) % 3]], m.vertices[t[(c + 2) % 3]]));
  dc.angle_defect.resize(m.vertices.size());
  for (std::size_t v = 0; v < m.vertices.size(); ++v) dc.angle_defect[v] = 2.0 * std::numbers::pi - angles[v].value();

  // Each undirected edge: the face holding u -> v with u < v, and its twin.
  std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> directed;
  for (std::int64_t f = 0; f < F; ++f)
    for (int c = 0; c < 3; ++c) directed[{m.faces[f][c], m.faces[f][(c + 1) % 3]}] = f;
  for (const auto& [key, f1] : directed) {
    auto [u, v] = key;
    if (u > v) continue;
    std::int64_t f2 = directed.at({v, u});
    Point e = m.vertices[v] - m.vertices[u];
    double len = norm(e);
    Point eh = (1.0 / len) * e;
    dc.edges.push_back({u, v});
    dc.edge_length.push_back(len);
    dc.dihedral.push_back(std::atan2(dot(cross(fn[f1], fn[f2]), eh), dot(fn[f1], fn[f2])));
  }
  return dc;
}

//! W_0 .. W_n as boundary curvature integrals.
inline std::vector<double> quermass_from_curvature(const DiscreteCurvature& dc) {
  const auto V = [&](const std::vector<double>& x) {
    return detail::ordered_sum(static_cast<std::int64_t>(x.size()), [&](std::int64_t i) { return x[i]; });
  };
  if (dc.dim == 2) return {dc.enclosed_volume, 0.5 * dc.boundary_measure, 0.5 * V(dc.turning)};
  double mean = 0.5 * detail::ordered_sum(static_cast<std::int64_t>(dc.edges.size()),
                                          [&](std::int64_t e) { return dc.edge_length[e] * dc.dihedral[e]; });
  return {dc.enclosed_volume, dc.boundary_measure / 3.0, mean / 3.0, V(dc.angle_defect) / 3.0};
}

//! Total Gauss curvature (turning or angle defect).
inline double total_gauss_curvature(const DiscreteCurvature& dc) {
  return dc.dim * quermass_from_curvature(dc).back();
}

//! |total Gauss curvature - n * omega_n * chi| with chi the Euler
//! characteristic of the enclosed body.
inline double gauss_bonnet_check(const DiscreteCurvature& dc, std::int64_t chi) {
  return std::abs(total_gauss_curvature(dc) - dc.dim * unit_ball_volume(dc.dim) * static_cast<double>(chi));
}

inline double chi_from_curvature(const DiscreteCurvature& dc) {
  return quermass_from_curvature(dc).back() / unit_ball_volume(dc.dim);
}

//! Relative error of the fitted W_i against the curvature integrals, i = 1..n.
inline std::vector<double> crosscheck_fit_vs_curvature(const SteinerFit& fit, const DiscreteCurvature& dc) {
  if (fit.n != dc.dim) throw InvalidArgument("crosscheck_fit_vs_curvature: dimensions differ");
  auto w = quermass_from_curvature(dc);
  std::vector<double> out;
  for (int i = 1; i <= dc.dim; ++i)
    out.push_back(std::abs(fit.quermass[i] - w[i]) / std::max(std::abs(w[i]), 1e-12));
  return out;
}

} // namespace reachlab
