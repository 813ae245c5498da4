#include <gtest/gtest.h>

#include <reachlab/reach.hpp>

using namespace reachlab;

namespace {
const double pi = std::numbers::pi;

struct Fixture {
  BinaryGrid grid;
  DistanceField field;
};

Fixture make(ShapeSpec spec, double h = 0.01, double s_max = 1.0) {
  auto [g, t] = make_grid(spec.with_grid(h, s_max));
  auto f = distance_transform(g);
  return {std::move(g), std::move(f)};
}

void expect_bracket(const ReachEstimate& e) {
  EXPECT_LE(e.lo, e.value);
  EXPECT_LE(e.value, e.hi);
  EXPECT_GE(e.lo, 0.0);
}

PointedSample transformed(const PointedSample& ps, double scale, double angle, Point shift) {
  PointedSample out = ps;
  const double c = std::cos(angle), s = std::sin(angle);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto& p = ps.points[i];
    const auto& n = ps.normals[i];
    out.points[i] = {scale * (c * p[0] - s * p[1]) + shift[0], scale * (s * p[0] + c * p[1]) + shift[1], 0.0};
    out.normals[i] = {c * n[0] - s * n[1], s * n[0] + c * n[1], 0.0};
  }
  return out;
}

// Direct double loop, no skipping beyond an exact zero denominator.
double brute_pair_bound(const PointedSample& ps) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (std::size_t j = 0; j < ps.size(); ++j) {
      if (i == j) continue;
      double dx = ps.points[j][0] - ps.points[i][0], dy = ps.points[j][1] - ps.points[i][1];
      double den = std::abs(dx * ps.normals[i][0] + dy * ps.normals[i][1]);
      if (den < 1e-12) continue;
      best = std::min(best, (dx * dx + dy * dy) / (2 * den));
    }
  return best;
}
} // namespace

TEST(DigitalConvexity, Fixtures) {
  EXPECT_TRUE(is_digitally_convex(make(ShapeSpec::disk(1), 0.02, 0.1).grid));
  EXPECT_TRUE(is_digitally_convex(make(ShapeSpec::box(2, 1), 0.02, 0.1).grid));
  EXPECT_TRUE(is_digitally_convex(make(ShapeSpec::rounded_box(2, {1, 1, 0}, 0.5), 0.02, 0.1).grid));
  EXPECT_TRUE(is_digitally_convex(make(ShapeSpec::ball(1), 0.1, 0.2).grid));
  EXPECT_FALSE(is_digitally_convex(make(ShapeSpec::box_annulus(0.5, 1), 0.02, 0.1).grid));
}

TEST(DigitalConvexity, LShapeIsNotConvex) {
  auto [g, t] = make_grid(ShapeSpec::box(2, 1).with_grid(0.05, 0.1));
  for (std::int64_t i = 0; i < g.geom.cell_count(); ++i) {
    auto p = g.geom.center(i);
    if (p[0] > 0 && p[1] > 0) g.cells[i] = 0;
  }
  EXPECT_FALSE(is_digitally_convex(g));
}

TEST(ReachSemigroup, DiskBoundary) {
  auto fx = make(ShapeSpec::disk(1));
  auto e = reach_semigroup(fx.field, 0.9, ReachTarget::boundary);
  EXPECT_GE(e.value, 0.85);
  EXPECT_EQ(e.method, ReachMethod::semigroup);
  expect_bracket(e);
}

TEST(ReachSemigroup, AnnulusSetWitnessAtInnerCorner) {
  auto fx = make(ShapeSpec::box_annulus(0.5, 1));
  auto e = reach_semigroup(fx.field, 0.4, ReachTarget::set);
  EXPECT_LE(e.value, 0.1);
  expect_bracket(e);
  ASSERT_TRUE(e.witness.has_value());
  EXPECT_TRUE(e.witness->offsets);
  EXPECT_GT(e.witness->s, 0.0);
  EXPECT_LT(e.witness->t, 0.0);
  EXPECT_LE(std::abs(std::abs(e.witness->location[0]) - 0.5), 0.1);
  EXPECT_LE(std::abs(std::abs(e.witness->location[1]) - 0.5), 0.1);
}

TEST(ReachSemigroup, SquareSetHasNoViolation) {
  auto fx = make(ShapeSpec::box(2, 1));
  auto e = reach_semigroup(fx.field, 0.9, ReachTarget::set);
  EXPECT_EQ(e.value, 0.9);
  EXPECT_FALSE(e.witness.has_value());
}

TEST(ReachSemigroup, SquareBoundaryCorners) {
  auto fx = make(ShapeSpec::box(2, 1));
  auto e = reach_semigroup(fx.field, 0.9, ReachTarget::boundary);
  EXPECT_LE(e.value, 0.1);
  EXPECT_LE(e.value, 4 * 0.01 + 1e-12);
  ASSERT_TRUE(e.witness.has_value());
  EXPECT_LT(e.witness->s, 0.0);
  EXPECT_GT(e.witness->t, 0.0);
  EXPECT_GT(e.witness->discrepancy, 0.0);
  EXPECT_NEAR(std::abs(e.witness->location[0]), 1.0, 0.1);
  EXPECT_NEAR(std::abs(e.witness->location[1]), 1.0, 0.1);
}

TEST(ReachSemigroup, MarginErrors) {
  auto fx = make(ShapeSpec::disk(1), 0.02, 0.3);
  EXPECT_THROW(reach_semigroup(fx.field, 0.5, ReachTarget::set), PaddingError);
  EXPECT_THROW(reach_semigroup(fx.field, 0.01, ReachTarget::set), InvalidArgument);
  auto big = make(ShapeSpec::disk(1), 0.02, 1.5);
  EXPECT_THROW(reach_semigroup(big.field, 1.2, ReachTarget::boundary), InvalidArgument);
  EXPECT_NO_THROW(reach_semigroup(big.field, 1.2, ReachTarget::set));
}

TEST(ReachSemigroup, ScalesWithGeometry) {
  auto small = make(ShapeSpec::box(2, 0.5), 0.005, 0.5);
  auto large = make(ShapeSpec::box(2, 1.0), 0.01, 1.0);
  auto a = reach_semigroup(small.field, 0.2, ReachTarget::boundary);
  auto b = reach_semigroup(large.field, 0.4, ReachTarget::boundary);
  EXPECT_NEAR(b.value, 2 * a.value, 0.01);
  auto rs = make(ShapeSpec::rounded_box(2, {0.5, 0.5, 0}, 0.25), 0.005, 0.5);
  auto rl = make(ShapeSpec::rounded_box(2, {1, 1, 0}, 0.5), 0.01, 1.0);
  auto c = reach_semigroup(rs.field, 0.45, ReachTarget::boundary);
  auto d = reach_semigroup(rl.field, 0.9, ReachTarget::boundary);
  EXPECT_NEAR(d.value, 2 * c.value, 0.01);
}

TEST(ReachSemigroup, ThreadCountDoesNotChangeResult) {
  auto fx = make(ShapeSpec::box_annulus(0.5, 1), 0.02, 0.5);
  ReachEstimate one, eight;
  {
    ScopedThreadCount t(1);
    one = reach_semigroup(fx.field, 0.3, ReachTarget::set);
  }
  {
    ScopedThreadCount t(8);
    eight = reach_semigroup(fx.field, 0.3, ReachTarget::set);
  }
  EXPECT_EQ(one.value, eight.value);
  ASSERT_TRUE(one.witness && eight.witness);
  EXPECT_EQ(one.witness->s, eight.witness->s);
  EXPECT_EQ(one.witness->t, eight.witness->t);
  EXPECT_EQ(one.witness->location, eight.witness->location);
}

TEST(ReachSemigroup, AgreesWithNormalPairs) {
  for (auto spec : {ShapeSpec::disk(1), ShapeSpec::rounded_box(2, {1, 1, 0}, 0.5)}) {
    auto fx = make(spec);
    auto grid_est = reach_semigroup(fx.field, boundary_scan_limit(fx.field), ReachTarget::boundary);
    auto pair_est = reach_normal_pairs(make_curve(spec, 400));
    double tol = std::max(0.05 * pair_est.value, 4 * 0.01);
    EXPECT_LE(std::abs(grid_est.value - pair_est.value), tol) << to_string(spec.kind) << ": " << grid_est.value
                                                             << " vs " << pair_est.value;
  }
}

TEST(ReachSemigroup, CertifiesAlternatingFit) {
  auto disk = make(ShapeSpec::disk(1));
  auto e = reach_semigroup(disk.field, 0.9, ReachTarget::boundary);
  ASSERT_FALSE(e.witness.has_value());
  EXPECT_TRUE(alternating_fit(disk.field, e.value - 0.02).holds);
  auto rbox = make(ShapeSpec::rounded_box(2, {1, 1, 0}, 0.5));
  auto f = reach_semigroup(rbox.field, 0.4, ReachTarget::boundary);
  ASSERT_FALSE(f.witness.has_value());
  EXPECT_TRUE(alternating_fit(rbox.field, f.value - 0.02).holds);
}

TEST(ReachNormalPairs, CircleIsExactlyOne) {
  for (int m : {16, 100, 360}) {
    auto e = reach_normal_pairs(make_curve(ShapeSpec::disk(1), m));
    EXPECT_NEAR(e.value, 1.0, 1e-9) << m;
    EXPECT_EQ(e.method, ReachMethod::normal_pair);
    expect_bracket(e);
    ASSERT_TRUE(e.witness.has_value());
    EXPECT_FALSE(e.witness->offsets);
    EXPECT_NE(e.witness->a, e.witness->b);
  }
}

TEST(ReachNormalPairs, RoundedBoxMatchesBruteForce) {
  auto ps = make_curve(ShapeSpec::rounded_box(2, {1, 1, 0}, 0.5), 400);
  auto e = reach_normal_pairs(ps);
  EXPECT_NEAR(e.value, 0.5, 0.03 * 0.5);
  EXPECT_DOUBLE_EQ(e.value, brute_pair_bound(ps));
  auto w = *e.witness;
  Point d = w.pb - w.pa;
  EXPECT_NEAR(dot(d, d) / (2 * std::abs(dot(d, ps.normals[w.a]))), e.value, 1e-12);
}

TEST(ReachNormalPairs, TwoCircles) {
  auto one = make_curve(ShapeSpec::disk(1), 200);
  PointedSample ps = one;
  for (std::size_t i = 0; i < one.size(); ++i) {
    auto p = one.points[i];
    p[0] += 4.0;
    ps.points.push_back(p);
    ps.normals.push_back(one.normals[i]);
    ps.flagged.push_back(false);
  }
  std::vector<std::int64_t> loop;
  for (std::size_t i = one.size(); i < ps.size(); ++i) loop.push_back(static_cast<std::int64_t>(i));
  ps.loops.push_back(loop);
  EXPECT_NEAR(reach_normal_pairs(ps).value, 1.0, 1e-6);
}

TEST(ReachNormalPairs, ParallelLinesGiveHalfGap) {
  const double d = 0.3;
  PointedSample ps;
  ps.dim = 2;
  for (int i = 0; i < 21; ++i) {
    double x = -1.0 + 0.1 * i;
    ps.points.push_back({x, d, 0});
    ps.normals.push_back({0, 1, 0});
    ps.points.push_back({x, -d, 0});
    ps.normals.push_back({0, -1, 0});
    ps.flagged.push_back(false);
    ps.flagged.push_back(false);
  }
  auto e = reach_normal_pairs(ps);
  EXPECT_NEAR(e.value, d, 1e-12);
}

TEST(ReachNormalPairs, Errors) {
  auto square = make_curve(ShapeSpec::box(2, 1), 80);
  EXPECT_THROW(reach_normal_pairs(square), InvalidArgument);
  PointedSample line;
  line.dim = 2;
  for (int i = 0; i < 6; ++i) {
    line.points.push_back({0.1 * i, 0, 0});
    line.normals.push_back({0, 1, 0});
    line.flagged.push_back(false);
  }
  EXPECT_THROW(reach_normal_pairs(line), InvalidArgument);
  line.points.resize(3);
  line.normals.resize(3);
  line.flagged.resize(3);
  EXPECT_THROW(reach_normal_pairs(line), InvalidArgument);
}

TEST(ReachNormalPairs, RigidMotionAndScaling) {
  auto ps = make_curve(ShapeSpec::rounded_box(2, {1, 1, 0}, 0.5), 240);
  double base = reach_normal_pairs(ps).value;
  auto moved = reach_normal_pairs(transformed(ps, 1.0, 0.7, {3.0, -2.0, 0})).value;
  EXPECT_NEAR(moved, base, 1e-9 * base);
  for (double lambda : {0.5, 3.0}) {
    auto scaled = reach_normal_pairs(transformed(ps, lambda, 0.0, {0, 0, 0})).value;
    EXPECT_NEAR(scaled, lambda * base, 1e-12 * lambda * base);
  }
}

TEST(ReachNormalPairs, SphereMesh) {
  auto [mesh, t] = make_mesh(ShapeSpec::ball(1), {3, 64, 24});
  auto e = reach_normal_pairs(mesh_sample(mesh));
  EXPECT_NEAR(e.value, 1.0, 0.02);
}

TEST(ConvexRoundtrip, Examples) {
  auto disk = make(ShapeSpec::disk(1));
  auto a = convex_roundtrip(disk.field, 0.5);
  EXPECT_TRUE(a.holds);
  auto square = make(ShapeSpec::box(2, 1));
  auto b = convex_roundtrip(square.field, 0.3);
  EXPECT_FALSE(b.holds);
  EXPECT_NEAR(b.discrepancy, (4 - pi) * 0.09, 0.2 * (4 - pi) * 0.09);
  EXPECT_NEAR(std::abs(b.location[0]), 1.0, 0.15);
  auto rbox = make(ShapeSpec::rounded_box(2, {1, 1, 0}, 0.5));
  EXPECT_TRUE(convex_roundtrip(rbox.field, 0.5).holds);
  EXPECT_FALSE(convex_roundtrip(rbox.field, 0.7).holds);
}

TEST(ConvexRoundtrip, Errors) {
  auto ann = make(ShapeSpec::box_annulus(0.5, 1), 0.02, 0.2);
  EXPECT_THROW(convex_roundtrip(ann.field, 0.1), InvalidArgument);
  auto disk = make(ShapeSpec::disk(1), 0.02, 0.2);
  EXPECT_THROW(convex_roundtrip(disk.field, 1.0), InvalidArgument);
  EXPECT_THROW(convex_roundtrip(disk.field, 0.0), InvalidArgument);
}

TEST(Hadwiger, Examples) {
  auto rbox = make(ShapeSpec::rounded_box(2, {1, 1, 0}, 0.5));
  auto v = hadwiger_membership(rbox.field, 0.5);
  EXPECT_TRUE(v.member);
  ASSERT_EQ(v.residuals.size(), 2u);
  EXPECT_LE(v.residuals[1], 0.05);
  EXPECT_LE(v.residuals[0], 0.05);
  auto square = make(ShapeSpec::box(2, 1));
  EXPECT_FALSE(hadwiger_membership(square.field, 0.3).member);
  auto disk = make(ShapeSpec::disk(1));
  EXPECT_TRUE(hadwiger_membership(disk.field, 0.9).member);
}
