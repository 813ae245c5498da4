#include <gtest/gtest.h>

#include <reachlab/curvature.hpp>

using namespace reachlab;

namespace {
const double pi = std::numbers::pi;

PointedSample regular_polygon(int m, double radius, double phase = 0.0) {
  PointedSample ps;
  ps.dim = 2;
  std::vector<std::int64_t> loop;
  for (int k = 0; k < m; ++k) {
    double t = phase + 2 * pi * k / m;
    ps.points.push_back({radius * std::cos(t), radius * std::sin(t), 0});
    ps.normals.push_back({std::cos(t), std::sin(t), 0});
    ps.flagged.push_back(false);
    loop.push_back(k);
  }
  ps.loops.push_back(loop);
  return ps;
}

TriMesh moved(const TriMesh& m, double scale, Point shift) {
  // Rotation about the axis (1, 2, 2) / 3 by 0.9 rad, then scale and shift.
  Point k{1.0 / 3, 2.0 / 3, 2.0 / 3};
  double c = std::cos(0.9), s = std::sin(0.9);
  TriMesh out = m;
  for (auto& v : out.vertices) {
    Point r = c * v + s * cross(k, v) + ((1 - c) * dot(k, v)) * k;
    v = scale * r + shift;
  }
  return out;
}
} // namespace

TEST(NormalizedSymmetric, EqualArgumentsGivePowers) {
  for (int k = 1; k <= 4; ++k)
    for (double c : {0.5, 2.0, -1.5}) {
      std::vector<double> kappa(static_cast<std::size_t>(k), c);
      for (int j = 0; j <= k; ++j) EXPECT_DOUBLE_EQ(normalized_symmetric(kappa, j), std::pow(c, j)) << k << " " << j;
    }
  EXPECT_EQ(normalized_symmetric({3.0, 7.0}, 0), 1.0);
  EXPECT_DOUBLE_EQ(normalized_symmetric({1.0, 3.0}, 1), 2.0);
  EXPECT_DOUBLE_EQ(normalized_symmetric({1.0, 3.0}, 2), 3.0);
  EXPECT_THROW(normalized_symmetric({1.0}, 2), InvalidArgument);
}

TEST(PolylineCurvature, RegularPolygon) {
  auto dc = curvature_of_polyline(regular_polygon(360, 1.0));
  auto w = quermass_from_curvature(dc);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_NEAR(w[1], pi, 1e-4 * pi);
  EXPECT_NEAR(w[1], 360 * std::sin(pi / 360), 1e-12);
  EXPECT_NEAR(w[2], pi, 1e-9);
  EXPECT_NEAR(w[0], 0.5 * 360 * std::sin(2 * pi / 360), 1e-12);
  EXPECT_LE(gauss_bonnet_check(dc, 1), 1e-9);
  EXPECT_NEAR(chi_from_curvature(dc), 1.0, 1e-12);
  for (double t : dc.turning) EXPECT_NEAR(t, 2 * pi / 360, 1e-12);
}

TEST(PolylineCurvature, ShapeCurves) {
  auto rb = curvature_of_polyline(make_curve(ShapeSpec::rounded_box(2, {1, 1, 0}, 0.5), 400));
  auto w = quermass_from_curvature(rb);
  EXPECT_NEAR(w[2], pi, 1e-9);
  EXPECT_NEAR(w[1], 0.5 * (8 + pi), 0.01);
  // Turning is confined to the arcs: flat sides contribute nothing.
  auto sq = curvature_of_polyline(make_curve(ShapeSpec::box(2, 1), 80));
  EXPECT_NEAR(quermass_from_curvature(sq)[1], 4.0, 1e-12);
  EXPECT_NEAR(quermass_from_curvature(sq)[2], pi, 1e-12);
  auto ann = curvature_of_polyline(make_curve(ShapeSpec::box_annulus(0.5, 1), 200));
  EXPECT_NEAR(quermass_from_curvature(ann)[2], 0.0, 1e-9);
  EXPECT_NEAR(quermass_from_curvature(ann)[0], 3.0, 1e-9);
  EXPECT_LE(gauss_bonnet_check(ann, 0), 1e-9);
}

TEST(PolylineCurvature, RigidMotionAndScaling) {
  auto base = quermass_from_curvature(curvature_of_polyline(regular_polygon(97, 1.3)));
  auto turned = regular_polygon(97, 1.3, 0.37);
  for (auto& p : turned.points) p = p + Point{5.0, -3.0, 0};
  auto w = quermass_from_curvature(curvature_of_polyline(turned));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(w[i], base[i], 1e-12 * std::max(1.0, base[i]));
  auto big = quermass_from_curvature(curvature_of_polyline(regular_polygon(97, 2.6)));
  EXPECT_NEAR(big[1], 2 * base[1], 1e-12);
  EXPECT_NEAR(big[2], base[2], 1e-12);
  EXPECT_NEAR(big[0], 4 * base[0], 1e-12);
}

TEST(PolylineCurvature, Errors) {
  auto open = regular_polygon(20, 1.0);
  open.loops.clear();
  EXPECT_THROW(curvature_of_polyline(open), InvalidArgument);
  auto reversed = regular_polygon(20, 1.0);
  std::reverse(reversed.loops[0].begin(), reversed.loops[0].end());
  EXPECT_THROW(curvature_of_polyline(reversed), InvalidArgument);
}

TEST(MeshCurvature, Icosphere) {
  auto [mesh, t] = make_mesh(ShapeSpec::ball(1), {3, 64, 24});
  auto dc = curvature_of_mesh(mesh);
  auto w = quermass_from_curvature(dc);
  ASSERT_EQ(w.size(), 4u);
  EXPECT_NEAR(w[2], 4 * pi / 3, 0.01 * 4 * pi / 3);
  EXPECT_NEAR(w[3], 4 * pi / 3, 1e-9);
  EXPECT_NEAR(w[1], 4 * pi / 3, 0.02 * 4 * pi / 3);
  EXPECT_NEAR(w[0], 4 * pi / 3, 0.03 * 4 * pi / 3);
  EXPECT_LE(gauss_bonnet_check(dc, 1), 1e-8);
  for (double th : dc.dihedral) EXPECT_GT(th, 0.0);
}

TEST(MeshCurvature, TorusAndRoundedCube) {
  auto [torus, t1] = make_mesh(ShapeSpec::torus(1.0, 0.3), {3, 64, 24});
  auto dt = curvature_of_mesh(torus);
  EXPECT_NEAR(quermass_from_curvature(dt)[3], 0.0, 1e-8);
  EXPECT_LE(gauss_bonnet_check(dt, 0), 1e-8);
  // Torus: area 4 pi^2 R rho, mean curvature integral 2 pi^2 R.
  EXPECT_NEAR(quermass_from_curvature(dt)[1], 4 * pi * pi * 0.3 / 3, 0.01 * 4 * pi * pi * 0.3 / 3);
  EXPECT_NEAR(quermass_from_curvature(dt)[2], 2 * pi * pi / 3, 0.02 * 2 * pi * pi / 3);
  auto [cube, t2] = make_mesh(ShapeSpec::rounded_box(3, {1, 1, 1}, 0.3), {3, 64, 24});
  auto dcube = curvature_of_mesh(cube);
  EXPECT_LE(gauss_bonnet_check(dcube, 1), 1e-8);
  auto w = quermass_from_curvature(dcube);
  ASSERT_TRUE(t2.quermass.has_value());
  for (int i = 0; i <= 3; ++i) EXPECT_NEAR(w[i], (*t2.quermass)[i], 0.02 * (*t2.quermass)[i]) << i;
}

TEST(MeshCurvature, RigidMotionAndScaling) {
  auto [mesh, t] = make_mesh(ShapeSpec::ball(1), {2, 64, 24});
  auto base = quermass_from_curvature(curvature_of_mesh(mesh));
  auto w = quermass_from_curvature(curvature_of_mesh(moved(mesh, 1.0, {2, -1, 0.5})));
  for (int i = 0; i <= 3; ++i) EXPECT_NEAR(w[i], base[i], 1e-12 * 10);
  auto s = quermass_from_curvature(curvature_of_mesh(moved(mesh, 2.0, {0, 0, 0})));
  for (int i = 0; i <= 3; ++i) EXPECT_NEAR(s[i], std::pow(2.0, 3 - i) * base[i], 1e-11 * std::pow(2.0, 3 - i));
}

TEST(MeshCurvature, Errors) {
  auto [mesh, t] = make_mesh(ShapeSpec::ball(1), {1, 64, 24});
  TriMesh inverted = mesh;
  for (auto& f : inverted.faces) std::swap(f[1], f[2]);
  EXPECT_THROW(curvature_of_mesh(inverted), InvalidArgument);
  TriMesh open = mesh;
  open.faces.pop_back();
  EXPECT_THROW(curvature_of_mesh(open), Error);
}

TEST(FitVsCurvature, DiskBallRoundedBox) {
  auto [disk, t1] = make_grid(ShapeSpec::disk(1).with_grid(0.01, 1.0));
  auto dfit = fit_outer(distance_transform(disk), 0.9);
  for (double e : crosscheck_fit_vs_curvature(dfit, curvature_of_polyline(regular_polygon(360, 1.0)))) EXPECT_LE(e, 0.02);

  auto [ball, t2] = make_grid(ShapeSpec::ball(1).with_grid(0.04, 2.0));
  auto bfit = fit_outer(distance_transform(ball), 1.96);
  auto [mesh, t3] = make_mesh(ShapeSpec::ball(1), {3, 64, 24});
  for (double e : crosscheck_fit_vs_curvature(bfit, curvature_of_mesh(mesh))) EXPECT_LE(e, 0.03);

  auto spec = ShapeSpec::rounded_box(2, {1, 1, 0}, 0.5);
  auto [rb, t4] = make_grid(spec.with_grid(0.01, 1.0));
  auto rfit = fit_outer(distance_transform(rb), 0.9);
  auto errs = crosscheck_fit_vs_curvature(rfit, curvature_of_polyline(make_curve(spec, 400)));
  EXPECT_LE(errs[1], 0.02);
  EXPECT_THROW(crosscheck_fit_vs_curvature(bfit, curvature_of_polyline(regular_polygon(36, 1.0))), InvalidArgument);
}
