#pragma once

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "obj.hpp"
#include "report.hpp"

namespace reachlab {

//! Everything a run depends on. Reports embed all of it.
struct RunConfig {
  std::string command;
  std::string input;
  std::string output;
  std::string report;          // empty: standard output
  std::string format = "json"; // json | csv
  bool assert_mode = false;
  std::optional<double> tol;

  // gen
  std::string shape = "disk";
  int dim = 2;
  double radius = 1.0;
  std::vector<double> half_width{1.0};
  double inner = 0.5, outer = 1.0, rounding = 0.5, tube = 0.3;
  double h = 0.01;
  double guard = 1.0;
  std::string curve;
  std::string mesh;
  std::int64_t samples = 800;
  int subdivisions = 3;

  // parallel, steiner-fit
  double s = 0.0;
  std::string s_range;

  // reach, crosscheck
  std::string method = "semigroup";
  std::string mode = "boundary";
  double r_max = 0.0;
  double r = 0.0;
  std::optional<double> min_reach;

  // regularity
  double alpha = 1.0;
  int probes = 8;
  double window = 0.0;

  // curvature
  std::optional<std::int64_t> chi;

  // flow
  std::string dt = "auto";
  double horizon_cap = std::numeric_limits<double>::infinity();
  double reach = 0.0;
  std::string trace;
  bool slope = false;

  Json to_json() const {
    Json j{{"command", command}, {"input", input}, {"output", output}, {"format", format}, {"assert", assert_mode}};
    j["tol"] = tol ? Json(*tol) : Json(nullptr);
    if (command == "gen")
      j.update(Json{{"shape", shape},
                    {"dim", dim},
                    {"radius", radius},
                    {"half_width", half_width},
                    {"inner", inner},
                    {"outer", outer},
                    {"rounding", rounding},
                    {"tube", tube},
                    {"h", h},
                    {"guard", guard},
                    {"curve", curve},
                    {"mesh", mesh},
                    {"samples", samples},
                    {"subdivisions", subdivisions}});
    if (command == "parallel") j["s"] = s;
    if (command == "steiner-fit") j["s_range"] = s_range;
    if (command == "reach") {
      j.update(Json{{"method", method}, {"mode", mode}, {"r_max", r_max}, {"r", r}});
      j["min_reach"] = min_reach ? Json(*min_reach) : Json(nullptr);
    }
    if (command == "regularity") j.update(Json{{"alpha", alpha}, {"probes", probes}, {"window", window}});
    if (command == "curvature") j["chi"] = chi ? Json(*chi) : Json(nullptr);
    if (command == "flow") {
      j.update(Json{{"dt", dt}, {"reach", reach}, {"curve", curve}, {"trace", trace}, {"slope", slope}});
      j["horizon_cap"] = report::number(horizon_cap);
    }
    if (command == "crosscheck") j.update(Json{{"r", r}, {"curve", curve}});
    return j;
  }
};

//! Verdict failure under --assert: exit code 2 with the failing quantity.
struct AssertionFailure {
  std::string quantity;
};

namespace cli_detail {

inline bool ends_with(const std::string& s, const std::string& tail) {
  return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

// File errors carry the path in front of the line number.
template <class F>
auto load(const std::string& path, F&& reader) {
  try {
    return reader(path);
  } catch (const FormatError& e) {
    throw Error(path + ": " + e.what());
  }
}

inline BinaryGrid load_grid(const std::string& path) { return load(path, [](const std::string& p) { return load_rgrid(p); }); }

inline ObjData load_object(const std::string& path) { return load(path, [](const std::string& p) { return load_obj(p); }); }

inline PointedSample load_sample(const std::string& path) {
  auto d = load_object(path);
  return d.faces.empty() ? to_sample(d) : mesh_sample(to_mesh(d));
}

inline ShapeSpec shape_of(const RunConfig& c) {
  ShapeSpec s;
  s.kind = shape_kind_from_string(c.shape);
  s.dim = s.kind == ShapeKind::disk || s.kind == ShapeKind::box_annulus ? 2
          : s.kind == ShapeKind::ball || s.kind == ShapeKind::torus   ? 3
                                                                       : c.dim;
  if (c.half_width.empty() || c.half_width.size() > 3) throw InvalidArgument("--half-width takes one to three values");
  for (int a = 0; a < 3; ++a)
    s.half_width[a] = c.half_width[std::min<std::size_t>(a, c.half_width.size() - 1)];
  s.radius = c.radius;
  s.inner = c.inner;
  s.outer = c.outer;
  s.rounding = c.rounding;
  s.tube = c.tube;
  s.h = c.h;
  s.s_max = c.guard;
  return s;
}

// "lo:hi:step" -> lattice-snapped offsets from lo to hi inclusive.
inline std::vector<double> parse_range(const std::string& text, double h) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(parse_double(item, 0));
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
    throw InvalidArgument("offset range must read lo:hi:step with lo <= hi and step > 0");
  std::vector<double> out;
  const auto count = static_cast<std::int64_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  for (std::int64_t k = 0; k <= count; ++k) {
    double s = snap_to_lattice(parts[0] + static_cast<double>(k) * parts[2], h);
    if (s == 0.0) s = 0.0;
    if (out.empty() || s != out.back()) out.push_back(s);
  }
  return out;
}

// 1-D samples "x,f" per line on a uniform lattice; a header line is allowed.
inline SampledFunction read_function_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  std::vector<double> xs, fs;
  std::vector<std::size_t> lines;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw FormatError("expected 'x,f'", number);
    std::string a = line.substr(0, comma), b = line.substr(comma + 1);
    if (xs.empty() && fs.empty() && number == 1 && !a.empty() && std::isalpha(static_cast<unsigned char>(a[0]))) continue;
    xs.push_back(parse_double(a, number));
    fs.push_back(parse_double(b, number));
    lines.push_back(number);
  }
  if (xs.size() < 3) throw InvalidArgument(path + ": need at least three samples");
  const double d = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
  if (!(d > 0.0)) throw InvalidArgument(path + ": x must increase");
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (std::abs(xs[i] - (xs.front() + static_cast<double>(i) * d)) > 1e-6 * d)
      throw FormatError("samples are not evenly spaced", lines[i]);
  SampledFunction f;
  f.dim = 1;
  f.size[0] = static_cast<std::int64_t>(xs.size());
  f.size[1] = 1;
  f.origin[0] = xs.front();
  f.spacing = d;
  f.values = fs;
  refresh_bound(f);
  return f;
}

inline SampledFunction load_function_csv(const std::string& path) {
  return load(path, [](const std::string& p) { return read_function_csv(p); });
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << text;
}

inline void require(bool ok, const std::string& quantity) {
  if (!ok) throw AssertionFailure{quantity};
}

inline std::string cmp(const char* name, double value, const char* rel, double bound) {
  return std::string(name) + " = " + format_double(value) + " " + rel + " " + format_double(bound);
}

} // namespace cli_detail

// ---- commands --------------------------------------------------------------

inline Json run_gen(const RunConfig& c) {
  using namespace cli_detail;
  if (c.output.empty()) throw InvalidArgument("gen needs -o <file.rgrid>");
  auto spec = shape_of(c);
  auto [grid, truth] = make_grid(spec);
  save_rgrid(c.output, grid);
  Json j{{"shape", to_string(spec.kind)},
         {"dim", spec.dim},
         {"size", Json(std::vector<std::int64_t>(grid.geom.size.begin(), grid.geom.size.begin() + spec.dim))},
         {"spacing", grid.geom.spacing},
         {"occupied", grid.occupied_count()},
         {"volume", volume(grid)},
         {"ground_truth", report::of(truth)}};
  if (!c.curve.empty()) {
    if (spec.dim != 2) throw InvalidArgument("--curve needs a planar shape; use --mesh for solids");
    auto ps = make_curve(spec, c.samples);
    save_obj(c.curve, to_obj(ps));
    j["curve_samples"] = ps.size();
  }
  if (!c.mesh.empty()) {
    if (spec.dim != 3) throw InvalidArgument("--mesh needs a three-dimensional shape");
    MeshOptions mo;
    mo.subdivisions = c.subdivisions;
    auto [m, t] = make_mesh(spec, mo);
    save_obj(c.mesh, to_obj(m));
    j["mesh_faces"] = m.faces.size();
  }
  return j;
}

inline Json run_parallel(const RunConfig& c) {
  using namespace cli_detail;
  auto g = load_grid(c.input);
  auto out = parallel_set(g, c.s);
  if (!c.output.empty()) save_rgrid(c.output, out);
  return {{"s", c.s},
          {"threshold", lattice_threshold(c.s, g.geom.spacing)},
          {"occupied", out.occupied_count()},
          {"volume", volume(out)},
          {"input_volume", volume(g)}};
}

inline Json run_steiner(const RunConfig& c) {
  using namespace cli_detail;
  auto g = load_grid(c.input);
  auto f = distance_transform(g);
  const double h = g.geom.spacing;
  SteinerFit fit = c.s_range.empty() ? fit_outer(f, default_outer_window(f, 0.5))
                                     : fit_offsets(f, parse_range(c.s_range, h));
  auto mc = minkowski_content(f);
  double span = std::max(std::abs(fit.s_lo), std::abs(fit.s_hi));
  double tau = c.tol ? *c.tol : 3.0 * h * mc.value * span;
  if (c.assert_mode) require(fit.max_residual <= tau, cmp("max_residual", fit.max_residual, ">", tau));
  return {{"fit", report::of(fit)},
          {"tau", tau},
          {"minkowski_content", mc.value},
          {"minkowski_from_fit", mc.from_fit},
          {"euler_from_fit", euler_from_fit(fit)}};
}

inline Json run_reach(const RunConfig& c) {
  using namespace cli_detail;
  if (c.method == "normal-pairs") {
    auto ps = load_sample(c.input);
    auto e = reach_normal_pairs(ps);
    double floor_value = c.min_reach.value_or(0.0);
    if (c.assert_mode)
      require(c.min_reach ? e.value >= floor_value : e.value > 0.0, cmp("reach", e.value, "<", floor_value));
    return {{"estimate", report::of(e, ps.dim)}, {"samples", ps.size()}};
  }
  auto g = load_grid(c.input);
  auto f = distance_transform(g);
  const double h = g.geom.spacing;
  if (c.method == "roundtrip") {
    auto rt = convex_roundtrip(f, c.r);
    if (c.assert_mode) require(rt.holds, cmp("slack_volume", rt.slack_volume, ">", rt.tolerance));
    return {{"r", c.r}, {"roundtrip", report::of(rt, g.geom.dim)}};
  }
  if (c.method != "semigroup") throw InvalidArgument("unknown reach method '" + c.method + "'");
  ReachTarget target;
  if (c.mode == "set")
    target = ReachTarget::set;
  else if (c.mode == "boundary")
    target = ReachTarget::boundary;
  else
    throw InvalidArgument("--mode must be set or boundary");
  double r_max = c.r_max;
  if (r_max <= 0.0)
    r_max = target == ReachTarget::boundary ? boundary_scan_limit(f) : snap_to_lattice(outer_margin(f) - 2.0 * h, h);
  auto e = reach_semigroup(f, r_max, target);
  double floor_value = c.min_reach.value_or(r_max);
  if (c.assert_mode) require(e.value >= floor_value - 1e-12, cmp("reach", e.value, "<", floor_value));
  return {{"r_max", r_max}, {"target", to_string(target)}, {"estimate", report::of(e, g.geom.dim)}};
}

inline Json run_regularity(const RunConfig& c) {
  using namespace cli_detail;
  if (ends_with(c.input, ".csv")) {
    auto f = load_function_csv(c.input);
    ScanOptions so;
    if (c.tol) so.slope_threshold = *c.tol;
    auto rep = second_difference_scan(f, c.alpha, so);
    if (c.assert_mode)
      require(rep.verdict == Verdict::consistent,
              cmp("divergence_trend", rep.divergence_trend, ">", so.slope_threshold));
    return {{"nodes", f.node_count()}, {"spacing", f.spacing}, {"scan", report::of(rep)}};
  }
  auto ps = load_sample(c.input);
  CrosscheckOptions o;
  o.probes = c.probes;
  o.window = c.window;
  auto rc = regularity_reach_crosscheck(ps, o);
  if (c.assert_mode)
    require(rc.agree, std::string("regularity ") + (rc.regular ? "consistent" : "inconsistent") + " but reach " +
                          format_double(rc.reach.value));
  return {{"samples", ps.size()}, {"crosscheck", report::of(rc, ps.dim)}};
}

inline Json run_curvature(const RunConfig& c) {
  using namespace cli_detail;
  auto d = load_object(c.input);
  DiscreteCurvature dc;
  std::optional<std::int64_t> chi = c.chi;
  std::string chi_source = chi ? "option" : "";
  if (d.faces.empty()) {
    dc = curvature_of_polyline(to_sample(d));
  } else {
    auto m = to_mesh(d);
    dc = curvature_of_mesh(m);
    if (!chi) {
      chi = mesh_euler_characteristic(m) / 2;
      chi_source = "surface euler characteristic / 2";
    }
  }
  Json j{{"curvature", report::of(dc)}};
  if (chi) {
    double residual = gauss_bonnet_check(dc, *chi);
    j["chi"] = *chi;
    j["chi_source"] = chi_source;
    j["gauss_bonnet_residual"] = residual;
    double tol = c.tol.value_or(1e-8);
    if (c.assert_mode) require(residual <= tol, cmp("gauss_bonnet_residual", residual, ">", tol));
  } else {
    j["chi"] = nullptr;
  }
  return j;
}

inline Json run_flow_command(const RunConfig& c) {
  using namespace cli_detail;
  auto g = load_grid(c.input);
  FlowOptions o;
  if (c.dt != "auto") o.dt = parse_double(c.dt, 0);
  o.horizon_cap = c.horizon_cap;
  o.reach = c.reach;
  PointedSample carrier;
  if (!c.curve.empty()) {
    carrier = load_sample(c.curve);
    o.carrier = &carrier;
  }
  auto tr = run_flow(g, o);
  auto ede = verify_ede(tr);
  if (!c.trace.empty()) {
    std::string lines;
    for (auto& r : report::trace_records(tr)) lines += r.dump() + "\n";
    write_text(c.trace, lines);
  }
  Json j = report::of(tr, ede);
  if (c.slope) {
    Json slopes = Json::array();
    for (int i = 0; i < tr.n; ++i) slopes.push_back(report::of(measure_slope(g, i)));
    j["slope"] = slopes;
  }
  double tol = c.tol.value_or(0.03);
  if (c.assert_mode)
    require(ede.max_residual <= tol * tr.W_values.front(),
            cmp("ede_residual", ede.max_residual, ">", tol * tr.W_values.front()));
  return j;
}

inline Json run_crosscheck(const RunConfig& c) {
  using namespace cli_detail;
  auto g = load_grid(c.input);
  PointedSample sample;
  const PointedSample* curve = nullptr;
  if (!c.curve.empty()) {
    sample = load_sample(c.curve);
    curve = &sample;
  }
  auto x = theorem_crosscheck(g, c.r, curve);
  if (c.assert_mode)
    require(x.unanimous, "verdicts disagree: " + (x.disagreements.empty() ? std::string() : x.disagreements.front()));
  return report::of(x, g.geom.dim);
}

//! Runs one command and writes its report. Returns the process exit code:
//! 0 success, 1 error, 2 verdict failure under --assert.
inline int dispatch(const RunConfig& c, std::ostream& out, std::ostream& err) {
  Json result;
  int code = 0;
  std::string failure;
  try {
    if (c.format != "json" && c.format != "csv") throw InvalidArgument("--format must be json or csv");
    if (c.command == "gen")
      result = run_gen(c);
    else if (c.command == "parallel")
      result = run_parallel(c);
    else if (c.command == "steiner-fit")
      result = run_steiner(c);
    else if (c.command == "reach")
      result = run_reach(c);
    else if (c.command == "regularity")
      result = run_regularity(c);
    else if (c.command == "curvature")
      result = run_curvature(c);
    else if (c.command == "flow")
      result = run_flow_command(c);
    else if (c.command == "crosscheck")
      result = run_crosscheck(c);
    else
      throw InvalidArgument("unknown command '" + c.command + "'");
  } catch (const AssertionFailure& a) {
    err << "assertion failed: " << a.quantity << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  auto doc = report::envelope(c.command, c.to_json(), result);
  std::string text = c.format == "json" ? doc.dump(2) + "\n" : report::to_csv(doc);
  try {
    if (c.report.empty())
      out << text;
    else
      cli_detail::write_text(c.report, text);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return code;
}

//! Parses argv into a RunConfig (CLI11; unknown options and config keys are
//! rejected) and dispatches it.
inline int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"reachlab: parallel sets, Steiner fits, reach, regularity, curvature and breadth flow"};
  app.set_help_flag("--help", "print this help and exit");
  app.set_config("--config", "", "TOML or INI file; values go in a [command] section");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  auto common = [&](CLI::App* sub, bool needs_input) {
    sub->allow_config_extras(CLI::config_extras_mode::error);
    if (needs_input) sub->add_option("input", c.input, "input file")->required();
    sub->add_option("--report", c.report, "write the report here instead of standard output");
    sub->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_flag("--assert", c.assert_mode, "exit 2 when the command's verdict fails");
    sub->add_option("--tol", c.tol, "tolerance override for --assert");
  };

  auto* gen = app.add_subcommand("gen", "digitize a fixture shape");
  common(gen, false);
  gen->add_option("--shape", c.shape, "box, disk, ball, box_annulus, rounded_box, torus");
  gen->add_option("--dim", c.dim, "dimension for box and rounded_box");
  gen->add_option("--radius", c.radius, "disk/ball radius, torus major radius");
  gen->add_option("--half-width", c.half_width, "box core half-widths (one value broadcasts)");
  gen->add_option("--inner", c.inner, "box_annulus inner half-width");
  gen->add_option("--outer", c.outer, "box_annulus outer half-width");
  gen->add_option("--rounding", c.rounding, "rounded_box radius");
  gen->add_option("--tube", c.tube, "torus tube radius");
  gen->add_option("--h", c.h, "grid spacing");
  gen->add_option("--guard", c.guard, "largest outer offset the grid must hold");
  gen->add_option("-o,--output", c.output, "output .rgrid");
  gen->add_option("--curve", c.curve, "also write a boundary polyline (.obj)");
  gen->add_option("--samples", c.samples, "polyline sample count");
  gen->add_option("--mesh", c.mesh, "also write a boundary mesh (.obj)");
  gen->add_option("--subdivisions", c.subdivisions, "icosphere subdivisions");

  auto* par = app.add_subcommand("parallel", "parallel set at offset s");
  common(par, true);
  par->add_option("--s", c.s, "offset (negative erodes)")->required();
  par->add_option("-o,--output", c.output, "output .rgrid");

  auto* st = app.add_subcommand("steiner-fit", "Steiner polynomial fit of V(A_s)");
  common(st, true);
  st->add_option("--s", c.s_range, "offset range lo:hi:step (default: outer ladder)");

  auto* re = app.add_subcommand("reach", "reach estimate");
  common(re, true);
  re->add_option("--method", c.method, "semigroup, normal-pairs, roundtrip")
      ->check(CLI::IsMember({"semigroup", "normal-pairs", "roundtrip"}));
  re->add_option("--mode", c.mode, "set or boundary (semigroup)")->check(CLI::IsMember({"set", "boundary"}));
  re->add_option("--r-max", c.r_max, "scan limit (semigroup)");
  re->add_option("--r", c.r, "radius (roundtrip)");
  re->add_option("--min-reach", c.min_reach, "--assert floor");

  auto* rg = app.add_subcommand("regularity", "second-difference scan (.csv) or regularity/reach crosscheck (.obj)");
  common(rg, true);
  rg->add_option("--alpha", c.alpha, "Hoelder exponent in (0, 1]");
  rg->add_option("--probes", c.probes, "probe count on curves");
  rg->add_option("--window", c.window, "patch window on curves (0: automatic)");

  auto* cu = app.add_subcommand("curvature", "quermass integrals from curvature of a polyline or mesh");
  common(cu, true);
  cu->add_option("--chi", c.chi, "Euler characteristic for the Gauss-Bonnet check");

  auto* fl = app.add_subcommand("flow", "mean-breadth flow by inner parallel sets");
  common(fl, true);
  fl->add_option("--dt", c.dt, "time step or 'auto'");
  fl->add_option("--horizon-cap", c.horizon_cap, "stop before T");
  fl->add_option("--reach", c.reach, "boundary reach override (0: estimate)");
  fl->add_option("--curve", c.curve, "boundary polyline for curvature-based breadth");
  fl->add_option("--trace", c.trace, "write JSON lines, one record per step");
  fl->add_flag("--slope", c.slope, "also probe the slopes of every W_i");

  auto* cx = app.add_subcommand("crosscheck", "compare reach, Steiner and regularity verdicts at radius r");
  common(cx, true);
  cx->add_option("--r", c.r, "radius")->required();
  cx->add_option("--curve", c.curve, "boundary polyline for the regularity verdict");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? 0 : 1;
  }
  for (auto* sub : app.get_subcommands()) c.command = sub->get_name();
  return dispatch(c, out, err);
}

} // namespace reachlab
