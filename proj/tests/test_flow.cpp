#include <gtest/gtest.h>

#include <reachlab/flow.hpp>

using namespace reachlab;

namespace {
const double pi = std::numbers::pi;

BinaryGrid grid_of(ShapeSpec spec, double h = 0.01, double s_max = 1.0) {
  return make_grid(spec.with_grid(h, s_max)).first;
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy * sxy / (sxx * syy);
}

// Rounded box of half-width 1 and rounding 0.5; its boundary reach is 0.5.
const BinaryGrid& rbox() {
  static const BinaryGrid g = grid_of(ShapeSpec::rounded_box(2, {1, 1, 0}, 0.5));
  return g;
}

const FlowTrace& rbox_trace() {
  static const FlowTrace tr = [] {
    FlowOptions o;
    o.reach = 0.5;
    return run_flow(rbox(), o);
  }();
  return tr;
}
} // namespace

TEST(RunFlow, RoundedBoxHorizonAndTimes) {
  const auto& tr = rbox_trace();
  EXPECT_DOUBLE_EQ(tr.T, 0.5 / pi);
  EXPECT_DOUBLE_EQ(tr.dt, 2 * 0.01 / pi);
  EXPECT_EQ(tr.times.front(), 0.0);
  EXPECT_LE(tr.times.back(), tr.T * (1 + 1e-12));
  for (std::size_t k = 1; k < tr.times.size(); ++k) EXPECT_GT(tr.times[k], tr.times[k - 1]);
  EXPECT_EQ(tr.bodies.size(), tr.times.size());
  EXPECT_EQ(tr.hausdorff_steps.size() + 1, tr.times.size());
  EXPECT_EQ(tr.bodies.front().cells, rbox().cells);
}

TEST(RunFlow, RoundedBoxBreadthIsAffineAndDropsByHalfPi) {
  const auto& tr = rbox_trace();
  for (std::size_t k = 1; k < tr.W_values.size(); ++k) EXPECT_LT(tr.W_values[k], tr.W_values[k - 1]);
  EXPECT_GE(r_squared(tr.times, tr.W_values), 0.999);
  EXPECT_NEAR(tr.W_values.front(), (8 + pi) / 2, 0.01 * (8 + pi) / 2);
  double drop = tr.W_values.front() - tr.W_values.back();
  EXPECT_NEAR(drop / (pi * pi * tr.times.back()), 1.0, 0.03);
  for (auto& s : tr.W_source) EXPECT_EQ(s, "fit");
}

TEST(RunFlow, RoundedBoxEndsOnSquareWithZeroReachBoundary) {
  const auto& tr = rbox_trace();
  EXPECT_EQ(tr.terminal_class, TerminalClass::zero_reach_boundary);
  ASSERT_TRUE(tr.terminal_reach.has_value());
  EXPECT_LE(*tr.terminal_reach, 4 * 0.01 + 1e-12);
  // Oracle: the square [-1, 1]^2 digitized on the same lattice.
  BinaryGrid square(tr.terminal.geom);
  for (std::int64_t i = 0; i < square.geom.cell_count(); ++i)
    square.cells[i] = contains(ShapeSpec::box(2, 1), square.geom.center(i)) ? 1 : 0;
  EXPECT_TRUE(slack_difference_cells(square, tr.terminal).empty());
}

TEST(RunFlow, RoundedBoxEnergyIdentity) {
  const auto& tr = rbox_trace();
  auto e = verify_ede(tr);
  EXPECT_LE(e.max_residual, 0.03 * tr.W_values.front());
  EXPECT_LE(e.worst_s, e.worst_t);
}

TEST(RunFlow, MetricDerivativeStaysNearOmega) {
  // Lattice-level bound only; the sub-cell boundary fixes a step to a few
  // tenths of a cell.
  const auto& tr = rbox_trace();
  for (double s : tr.hausdorff_steps) {
    EXPECT_GT(s, 0.0);
    EXPECT_NEAR(s, pi * tr.dt, 0.01);
  }
}

TEST(RunFlow, CarrierSuppliesCurvatureBreadth) {
  auto carrier = make_curve(ShapeSpec::rounded_box(2, {1, 1, 0}, 0.5), 2000);
  FlowOptions o;
  o.reach = 0.5;
  o.dt = 0.5 / pi / 8;
  o.carrier = &carrier;
  auto tr = run_flow(rbox(), o);
  ASSERT_EQ(tr.times.size(), 9u);
  for (std::size_t k = 0; k + 1 < tr.times.size(); ++k) {
    EXPECT_EQ(tr.W_source[k], "curvature");
    double depth = pi * tr.times[k];
    EXPECT_NEAR(tr.W_values[k], (8 + pi) / 2 - pi * depth, 1e-3);
  }
  EXPECT_EQ(tr.W_source.back(), "fit");
  EXPECT_LE(verify_ede(tr).max_residual, 0.03 * tr.W_values.front());
}

TEST(RunFlow, DiskTerminatesLowerDimensional) {
  auto disk = grid_of(ShapeSpec::disk(1));
  FlowOptions o;
  o.reach = 0.98;
  o.dt = o.reach / pi / 16;
  auto tr = run_flow(disk, o);
  EXPECT_EQ(tr.terminal_class, TerminalClass::lower_dimensional);
  EXPECT_LE(tr.terminal_inradius, 2 * 0.01);
  for (std::size_t k = 0; k < tr.times.size(); ++k) EXPECT_NEAR(tr.W_values[k], pi * (1 - pi * tr.times[k]), 0.02);
  EXPECT_LE(verify_ede(tr).max_residual, 0.02 * tr.W_values.front());
}

TEST(RunFlow, DiskEstimatesItsOwnReach) {
  auto disk = grid_of(ShapeSpec::disk(1), 0.02);
  auto tr = run_flow(disk);
  EXPECT_GT(tr.reach, 0.9);
  EXPECT_LE(tr.reach, 1.0);
  EXPECT_EQ(tr.terminal_class, TerminalClass::lower_dimensional);
}

TEST(RunFlow, StadiumShrinksToSegment) {
  auto stadium = grid_of(ShapeSpec::rounded_box(2, {0.6, 0, 0}, 0.4));
  FlowOptions o;
  o.reach = 0.4;
  o.dt = 0.4 / pi / 8;
  auto tr = run_flow(stadium, o);
  EXPECT_EQ(tr.terminal_class, TerminalClass::lower_dimensional);
  EXPECT_LT(tr.times.back(), tr.T);
  // Two cells short of the reach only a sliver around the core segment is left.
  auto sliver = parallel_set(distance_transform(stadium), -(0.4 - 0.02));
  double max_y = 0, max_x = 0;
  for (std::int64_t i = 0; i < sliver.geom.cell_count(); ++i)
    if (sliver.occupied(i)) {
      auto p = sliver.geom.center(i);
      max_x = std::max(max_x, std::abs(p[0]));
      max_y = std::max(max_y, std::abs(p[1]));
    }
  EXPECT_LE(max_y, 0.02 + 1e-9);
  EXPECT_NEAR(max_x, 0.6, 0.03);
}

TEST(RunFlow, HorizonCapTruncates) {
  FlowOptions o;
  o.reach = 0.5;
  o.dt = 0.5 / pi / 8;
  o.horizon_cap = 0.5 * 0.5 / pi;
  auto tr = run_flow(rbox(), o);
  EXPECT_EQ(tr.terminal_class, TerminalClass::truncated);
  EXPECT_LE(tr.times.back(), o.horizon_cap * (1 + 1e-12));
  EXPECT_NEAR(tr.terminal_inradius, 1.5 - 0.25, 0.02);
}

TEST(RunFlow, Errors) {
  FlowOptions tiny;
  tiny.reach = 0.5;
  tiny.dt = 0.01 / pi;
  EXPECT_THROW(run_flow(rbox(), tiny), InvalidArgument);

  auto l = grid_of(ShapeSpec::box(2, 1), 0.05, 0.1);
  for (std::int64_t i = 0; i < l.geom.cell_count(); ++i) {
    auto p = l.geom.center(i);
    if (p[0] > 0 && p[1] > 0) l.cells[i] = 0;
  }
  EXPECT_THROW(run_flow(l), InvalidArgument);

  FlowOptions bad = tiny;
  bad.dt = 0.1;
  auto sq = make_curve(ShapeSpec::box(2, 1), 100);
  bad.carrier = &sq;
  EXPECT_THROW(run_flow(rbox(), bad), InvalidArgument);
}

TEST(RunFlow, RestartReproducesLaterBodies) {
  auto disk = grid_of(ShapeSpec::disk(1));
  FlowOptions o;
  o.reach = 0.9;
  o.dt = 0.9 / pi / 9;
  auto tr = run_flow(disk, o);
  for (std::size_t k : {2u, 5u}) {
    FlowOptions r = o;
    r.reach = o.reach - pi * tr.times[k];
    auto again = run_flow(tr.bodies[k], r);
    for (std::size_t j = 0; j < again.bodies.size() && k + j < tr.bodies.size(); ++j)
      EXPECT_TRUE(slack_difference_cells(again.bodies[j], tr.bodies[k + j]).empty()) << "k=" << k << " j=" << j;
  }
}

TEST(RunFlow, IndependentOfThreadCount) {
  auto disk = grid_of(ShapeSpec::disk(1), 0.02);
  FlowOptions o;
  o.reach = 0.9;
  FlowTrace a, b;
  {
    ScopedThreadCount t(1);
    a = run_flow(disk, o);
  }
  {
    ScopedThreadCount t(8);
    b = run_flow(disk, o);
  }
  EXPECT_EQ(a.W_values, b.W_values);
  EXPECT_EQ(a.hausdorff_steps, b.hausdorff_steps);
  EXPECT_EQ(a.volumes, b.volumes);
  EXPECT_EQ(a.terminal.cells, b.terminal.cells);
}

TEST(VerifyEde, SingleTimeIsExactlyZero) {
  FlowTrace tr;
  tr.times = {0.0};
  tr.W_values = {3.0};
  EXPECT_EQ(verify_ede(tr).max_residual, 0.0);
}

TEST(VerifyEde, ExactTraceHasNoResidual) {
  FlowTrace tr;
  tr.n = 2;
  for (int k = 0; k <= 10; ++k) {
    double t = 0.01 * k;
    tr.times.push_back(t);
    tr.W_values.push_back(pi * (1 - pi * t));
  }
  for (int k = 0; k < 10; ++k) tr.hausdorff_steps.push_back(pi * 0.01);
  EXPECT_NEAR(verify_ede(tr).max_residual, 0.0, 1e-12);
}

TEST(VerifyEde, FastStepsShowUp) {
  FlowTrace tr;
  tr.n = 2;
  for (int k = 0; k <= 4; ++k) {
    tr.times.push_back(0.1 * k);
    tr.W_values.push_back(10.0 - pi * pi * 0.1 * k);
  }
  tr.hausdorff_steps = {pi * 0.1, pi * 0.2, pi * 0.1, pi * 0.1};
  auto e = verify_ede(tr);
  // Extra kinetic energy 0.5 * (4 - 1) * pi^2 * 0.1 on the second step.
  EXPECT_NEAR(e.max_residual, 1.5 * pi * pi * 0.1, 1e-12);
  EXPECT_LE(e.worst_s, 0.1 + 1e-12);
  EXPECT_GE(e.worst_t, 0.2 - 1e-12);
}

TEST(MeasureSlope, DiskVolumeAndBreadth) {
  auto disk = grid_of(ShapeSpec::disk(1));
  auto s0 = measure_slope(disk, 0);
  EXPECT_NEAR(s0.slope_value / s0.formula_value, 1.0, 0.02);
  EXPECT_NEAR(s0.formula_value, 2 * pi, 0.02 * 2 * pi);
  auto s1 = measure_slope(disk, 1);
  EXPECT_NEAR(s1.slope_value / s1.formula_value, 1.0, 0.02);
  EXPECT_NEAR(s1.formula_value, pi, 0.02 * pi);
  EXPECT_DOUBLE_EQ(s0.t_probe, 0.3);
  EXPECT_EQ(s0.depths.size(), 17u);
}

TEST(MeasureSlope, RoundedBox) {
  auto g = rbox();
  for (int i : {0, 1}) {
    auto s = measure_slope(g, i);
    EXPECT_GT(s.slope_value, 0.0);
    EXPECT_GT(s.formula_value, 0.0);
    EXPECT_NEAR(s.slope_value / s.formula_value, 1.0, 0.02) << "i=" << i;
  }
}

TEST(MeasureSlope, ScalesWithHomogeneity) {
  // Halving shape and spacing together gives the same cells, so every
  // volume scales by exactly 1/4.
  auto big = grid_of(ShapeSpec::disk(1), 0.02);
  auto small = grid_of(ShapeSpec::disk(0.5), 0.01, 0.5);
  ASSERT_EQ(big.cells, small.cells);
  for (int i : {0, 1}) {
    auto a = measure_slope(big, i, 0.3);
    auto b = measure_slope(small, i, 0.15);
    double lambda = std::pow(0.5, 2 - i - 1);
    EXPECT_NEAR(b.slope_value, lambda * a.slope_value, 1e-9 * std::abs(a.slope_value));
    EXPECT_NEAR(b.formula_value, lambda * a.formula_value, 1e-9 * std::abs(a.formula_value));
  }
}

TEST(MeasureSlope, Errors) {
  auto disk = grid_of(ShapeSpec::disk(1), 0.02);
  EXPECT_THROW(measure_slope(disk, -1), InvalidArgument);
  EXPECT_THROW(measure_slope(disk, 2), InvalidArgument);
  EXPECT_THROW(measure_slope(disk, 0, 0.04), InvalidArgument);
  EXPECT_THROW(measure_slope(disk, 0, 0.9), InvalidArgument);
}

TEST(Hausdorff, ErosionStepEqualsDepth) {
  for (auto spec : {ShapeSpec::disk(1), ShapeSpec::rounded_box(2, {1, 1, 0}, 0.5)}) {
    auto g = grid_of(spec);
    auto f = distance_transform(g);
    for (double t : {0.1, 0.25}) {
      EXPECT_NEAR(hausdorff_distance(g, parallel_set(f, -t)), t, 2 * 0.01);
      EXPECT_NEAR(interface_hausdorff(f, 0.0, t), t, 2 * 0.01);
    }
  }
}
