#ifndef PROJWEYL_CLI_HPP
#define PROJWEYL_CLI_HPP

// Command-line front end.  Exit codes: 0 success, 1 usage / IO / numerical
// failure, 2 mathematical verdict failure (incompatible, real points, not
// positive, not closed).

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "projweyl/compatibility.hpp"
#include "projweyl/error.hpp"
#include "projweyl/field_io.hpp"
#include "projweyl/finsler.hpp"
#include "projweyl/flat_model.hpp"
#include "projweyl/geodesic.hpp"
#include "projweyl/validate.hpp"

namespace projweyl::cli {

using json = nlohmann::json;

inline constexpr int kSchema = 1;

enum class CurveFormat { csv, json };

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes a path as CSV (header s,x,y,z,chart; embedded positions) or JSON.
inline void emit_curve(const PathSample& path, CurveFormat format, std::ostream& os) {
  if (path.empty()) throw Error(ErrorCode::empty_path, "nothing to emit");
  if (format == CurveFormat::csv) {
    os << "s,x,y,z,chart\n";
    for (const auto& p : path.points)
      os << format_double(p.s) << ',' << format_double(p.P[0]) << ',' << format_double(p.P[1]) << ','
         << format_double(p.P[2]) << ',' << to_string(p.chart) << '\n';
  } else {
    json pts = json::array();
    for (const auto& p : path.points)
      pts.push_back({{"s", p.s}, {"x", p.P[0]}, {"y", p.P[1]}, {"z", p.P[2]}, {"chart", std::string(to_string(p.chart))}});
    os << json{{"schema", kSchema}, {"points", pts}}.dump(2) << '\n';
  }
  if (!os) throw Error(ErrorCode::io_failure, "write failed");
}

inline void emit_curve(const PathSample& path, CurveFormat format, const std::string& file) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw Error(ErrorCode::io_failure, "cannot open '" + file + "' for writing");
  emit_curve(path, format, os);
}

namespace detail {

inline bool is_verdict(ErrorCode c) {
  switch (c) {
    case ErrorCode::incompatible_input:
    case ErrorCode::inadmissible_conic:
    case ErrorCode::real_point_input:
    case ErrorCode::degenerate_conic:
    case ErrorCode::positivity_violated:
    case ErrorCode::residual_failure:
    case ErrorCode::no_return: return true;
    default: return false;
  }
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string out_file;

  void write(const json& report) const {
    const std::string text = report.dump(2) + "\n";
    if (out_file.empty()) {
      out << text;
      return;
    }
    std::ofstream os(out_file, std::ios::binary);
    if (!os || !(os << text)) throw Error(ErrorCode::io_failure, "cannot write '" + out_file + "'");
  }
};

inline json header(const std::string& command) { return {{"schema", kSchema}, {"command", command}}; }

inline json vec(const Vec2<double>& v) { return json::array({v[0], v[1]}); }
inline json vec(const Vec3<double>& v) { return json::array({v[0], v[1], v[2]}); }
inline json sym(const Mat2<double>& g) { return json::array({g[0][0], g[0][1], g[1][1]}); }

inline double uniform(std::mt19937_64& rng, double a, double b) { return projweyl::detail::uniform(rng, a, b); }

// Structure selected by --conic / --field / --round.
struct StructureArgs {
  std::string conic_file;
  std::string field_file;
  bool round = false;

  void add(CLI::App* app) {
    auto* c = app->add_option("--conic", conic_file, "Conic JSON file")->check(CLI::ExistingFile);
    auto* f = app->add_option("--field", field_file, "Conformal structure JSON file")->check(CLI::ExistingFile);
    auto* r = app->add_flag("--round", round, "Round unit sphere");
    c->excludes(f)->excludes(r);
    f->excludes(r);
  }

  void require() const {
    if (conic_file.empty() && field_file.empty() && !round)
      throw Error(ErrorCode::malformed_config, "one of --conic, --field, --round is required");
  }

  std::optional<io::Structure> structure() const {
    if (!conic_file.empty()) return io::parse_structure(io::read_json(conic_file), conic_file);
    if (!field_file.empty()) return io::parse_structure(io::read_json(field_file), field_file);
    return std::nullopt;
  }

  std::string name() const { return round ? "round" : structure()->name; }
};

inline WeylSource weyl_source(const StructureArgs& a) {
  a.require();
  const auto s = a.structure();
  if (!s) {
    return WeylSource("round", {WeylStructureChart::conformal(round_factor(), zero_oneform(), ChartId::north),
                                WeylStructureChart::conformal(round_factor(), zero_oneform(), ChartId::south)});
  }
  if (s->conic) return WeylSource::from_conic(*s->conic);
  return WeylSource(s->name, {*s->conformal});
}

inline ConnectionField connection(const StructureArgs& a) {
  a.require();
  const auto s = a.structure();
  return s ? s->connection() : round_sphere_field();
}

inline ChartId default_chart(const StructureArgs& a) {
  if (!a.field_file.empty()) {
    const auto s = a.structure();
    return s->conformal->chart;
  }
  return ChartId::north;
}

// ---------------------------------------------------------------------------

struct CompatArgs {
  std::string config;
  std::string route;
  int grid = 33;
  double tol = kCompatibilityTolerance;
  double extent = 0.0;
  bool points = false;
};

inline int compat_check(const CompatArgs& a, const Context& ctx) {
  const json cfg = io::read_json(a.config);
  if (!cfg.contains("f") || !cfg.contains("connection"))
    throw Error(ErrorCode::malformed_config, "config needs \"f\" and \"connection\"");
  const ScalarField f = io::parse_factor(cfg["f"]);
  const ConnectionField conn = io::parse_connection(cfg["connection"]);
  const ChartId chart = io::parse_chart(cfg.value("chart", json()), ChartId::planar);
  const std::string route = !a.route.empty() ? a.route : cfg.value("route", std::string("isothermal"));
  CompatibilityReport r;
  if (route == "isothermal")
    r = check_isothermal(f, conn, Chart{chart}, a.grid, a.tol, a.extent);
  else if (route == "least-squares")
    r = check_least_squares(conformal_metric(f), conn, Chart{chart}, a.grid, a.tol, a.extent);
  else
    throw Error(ErrorCode::malformed_config, "route must be isothermal or least-squares");

  json rep = header("compat-check");
  rep["route"] = r.route;
  rep["chart"] = std::string(to_string(r.chart));
  rep["factor"] = f.name();
  rep["connection"] = conn.name();
  rep["grid"] = r.grid;
  rep["samples"] = r.points.size();
  rep["tolerance"] = r.tolerance;
  rep["max_residual"] = r.max_residual;
  rep["compatible"] = r.compatible;
  if (a.points) {
    json pts = json::array();
    for (const auto& q : r.points) pts.push_back({{"x", q.p[0]}, {"y", q.p[1]}, {"residual", q.residual}, {"beta", vec(q.beta)}});
    rep["points"] = pts;
  }
  ctx.write(rep);
  return r.compatible ? 0 : 2;
}

struct ConicArgs {
  std::string in;
  std::string chart = "north";
  int grid = 9;
  double tol = kCompatibilityTolerance;
  std::vector<double> u;
  bool points = false;
};

inline int conic_check(const ConicArgs& a, const Context& ctx) {
  const Conic q = io::parse_conic(io::read_json(a.in));
  json rep = header("conic check");
  rep["degenerate"] = q.degenerate();
  rep["determinant_abs"] = std::abs(q.determinant());
  if (q.degenerate()) {
    rep["real_points"] = nullptr;
    ctx.write(rep);
    return 2;
  }
  const auto r = has_real_points(q);
  rep["real_points"] = r.real_points;
  rep["minF"] = r.min_F;
  rep["argmin"] = vec(r.argmin);
  ctx.write(rep);
  return r.real_points ? 2 : 0;
}

inline int conic_section(const ConicArgs& a, const Context& ctx) {
  const Conic q = io::parse_conic(io::read_json(a.in));
  require_admissible(q);
  if (a.u.size() != 3) throw Error(ErrorCode::malformed_config, "--u needs three components");
  const Vec3<double> u = normalized(Vec3<double>{a.u[0], a.u[1], a.u[2]});
  const ProjPoint z = fiber_section(q, u);
  json rep = header("conic section");
  rep["u"] = vec(u);
  rep["re"] = vec(z.re());
  rep["im"] = vec(z.im());
  rep["rho"] = vec(rho(z));
  rep["on_conic"] = std::abs(q.bilinear(z.z, z.z));
  ctx.write(rep);
  return 0;
}

inline json conic_grid(const ConicStructure& cs, const ConicArgs& a, bool with_beta, double& max_residual) {
  const Chart chart{chart_from_string(a.chart)};
  if (!on_sphere(chart.id)) throw Error(ErrorCode::malformed_config, "conic structures live on sphere charts");
  json pts = json::array();
  max_residual = 0.0;
  for (const auto& p : chart_grid(chart, a.grid, [](const Vec2<double>&) { return true; })) {
    const auto w = conic_weyl_point(cs.conic(), chart, p, std::numeric_limits<double>::infinity());
    max_residual = std::max(max_residual, w.residual);
    json e = {{"x", p[0]}, {"y", p[1]}, {"g", sym(w.metric)}};
    if (with_beta) {
      e["beta"] = vec(w.beta);
      e["residual"] = w.residual;
    }
    pts.push_back(e);
  }
  return pts;
}

inline int conic_metric(const ConicArgs& a, const Context& ctx) {
  const ConicStructure cs(io::parse_conic(io::read_json(a.in)), a.in);
  double res = 0.0;
  json rep = header("conic metric");
  rep["chart"] = a.chart;
  rep["grid"] = a.grid;
  rep["normalization"] = "det1";
  rep["points"] = conic_grid(cs, a, false, res);
  ctx.write(rep);
  return 0;
}

inline int weyl_from_conic(const ConicArgs& a, const Context& ctx) {
  const ConicStructure cs(io::parse_conic(io::read_json(a.in)), a.in);
  double res = 0.0;
  json pts = conic_grid(cs, a, true, res);
  json rep = header("weyl-from-conic");
  rep["chart"] = a.chart;
  rep["grid"] = a.grid;
  rep["samples"] = pts.size();
  rep["tolerance"] = a.tol;
  rep["max_residual"] = res;
  rep["compatible"] = res < a.tol;
  if (a.points) rep["points"] = std::move(pts);
  ctx.write(rep);
  return res < a.tol ? 0 : 2;
}

struct GeodesicArgs {
  StructureArgs structure;
  std::string chart;
  std::vector<double> start;
  double h = kDefaultStep;
  double s_max = 2.0 * std::numbers::pi;
  int stride = 1;
  std::string emit = "csv";
};

inline GeodesicState geodesic_start(const StructureArgs& s, const std::string& chart, const std::vector<double>& v) {
  if (v.size() != 4) throw Error(ErrorCode::malformed_config, "--start needs x,y,vx,vy");
  const ChartId id = chart.empty() ? default_chart(s) : chart_from_string(chart);
  return {id, {v[0], v[1]}, {v[2], v[3]}, 0.0};
}

inline int geodesics(const GeodesicArgs& a, const Context& ctx) {
  const ConnectionField conn = connection(a.structure);
  const GeodesicState st = geodesic_start(a.structure, a.chart, a.start);
  const PathSample path = integrate(conn, st, a.h, a.s_max, {.stride = a.stride});
  const CurveFormat fmt = a.emit == "json" ? CurveFormat::json : CurveFormat::csv;
  if (ctx.out_file.empty())
    emit_curve(path, fmt, ctx.out);
  else
    emit_curve(path, fmt, ctx.out_file);
  return 0;
}

struct ZollArgs {
  StructureArgs structure;
  std::string chart;
  std::vector<double> start;
  int starts = 10;
  std::uint64_t seed = 1;
  double h = kDefaultStep;
  double s_max = kDefaultSMax;
  double tol = kClosureTolerance;
  double plane_tol = 1e-6;
};

inline int zoll_test(const ZollArgs& a, const Context& ctx) {
  const ConnectionField conn = connection(a.structure);
  std::vector<GeodesicState> starts;
  if (!a.start.empty()) {
    starts.push_back(geodesic_start(a.structure, a.chart, a.start));
  } else {
    std::mt19937_64 rng(a.seed);
    const ChartId id = a.chart.empty() ? default_chart(a.structure) : chart_from_string(a.chart);
    for (int n = 0; n < a.starts; ++n) {
      const Vec2<double> x = {uniform(rng, -1, 1), uniform(rng, -1, 1)};
      const double th = uniform(rng, 0, 2 * std::numbers::pi);
      starts.push_back({id, x, {std::cos(th), std::sin(th)}, 0.0});
    }
  }
  json results = json::array();
  bool all = true;
  double worst_err = 0.0, worst_plane = 0.0;
  for (const auto& st : starts) {
    PathSample loop;
    const auto c = closure_test(conn, st, a.tol, a.h, a.s_max, &loop);
    const double plane = c.closed ? great_circle_residual(loop) : std::numeric_limits<double>::quiet_NaN();
    const bool ok = c.closed && plane < a.plane_tol;
    all = all && ok;
    worst_err = std::max(worst_err, c.err);
    if (c.closed) worst_plane = std::max(worst_plane, plane);
    json e = {{"chart", std::string(to_string(st.chart))}, {"x", vec(st.x)}, {"v", vec(st.v)}, {"closed", c.closed},
              {"err", c.err}};
    e["s_return"] = c.closed ? json(c.s_return) : json(nullptr);
    e["plane_residual"] = c.closed ? json(plane) : json(nullptr);
    e["min_self_distance"] = c.closed ? json(c.min_self_distance) : json(nullptr);
    results.push_back(e);
  }
  json rep = header("zoll-test");
  rep["structure"] = a.structure.name();
  rep["tolerance"] = a.tol;
  rep["plane_tolerance"] = a.plane_tol;
  rep["closed"] = all;
  rep["max_closure_error"] = worst_err;
  rep["plane_residual"] = worst_plane;
  if (starts.size() == 1) rep["s_return"] = results[0]["s_return"];
  rep["results"] = results;
  ctx.write(rep);
  return all ? 0 : 2;
}

struct FinslerArgs {
  StructureArgs structure;
  int samples = 200;
  std::uint64_t seed = 1;
  double tol = 1e-4;
  std::string chart;
  std::vector<double> start;
  double h = 5e-3;
  double s_max = 20.0;
  double period_tol = 1e-6;
  std::string csv;
};

inline int finsler_invariants(const FinslerArgs& a, const Context& ctx) {
  const WeylSource src = weyl_source(a.structure);
  std::vector<ChartId> charts;
  for (ChartId id : {ChartId::north, ChartId::south, ChartId::gnomonic, ChartId::planar})
    if (src.has_chart(id)) charts.push_back(id);
  const bool planar = charts.size() == 1 && charts[0] == ChartId::planar;
  const double r = planar ? 0.8 : 1.0;
  std::mt19937_64 rng(a.seed);
  std::array<double, 3> eq{};
  double K = 0.0, I = 0.0, C = 0.0, pos = std::numeric_limits<double>::infinity();
  json rep = header("finsler invariants");
  rep["structure"] = src.name();
  rep["samples"] = a.samples;
  rep["seed"] = a.seed;
  rep["tolerance"] = a.tol;
  for (int n = 0; n < a.samples; ++n) {
    const ChartId id = charts[n % charts.size()];
    const UTBPoint u{id, {uniform(rng, -r, r), uniform(rng, -r, r)}, uniform(rng, 0, 2 * std::numbers::pi)};
    const double p = positivity_value(src.chart(id), u.x);
    pos = std::min(pos, p);
    if (!(p > 0.0)) {
      rep["positive"] = false;
      rep["min_positivity"] = pos;
      ctx.write(rep);
      return 2;
    }
    const auto inv = coframe_invariants(src.chart(id), u);
    for (int k = 0; k < 3; ++k) eq[k] = std::max(eq[k], inv.eq_residuals[k]);
    K = std::max(K, inv.K_residual);
    I = std::max(I, std::abs(inv.I));
    C = std::max(C, std::abs(inv.C));
  }
  const bool ok = eq[0] < a.tol && eq[1] < a.tol && eq[2] < a.tol;
  rep["positive"] = true;
  rep["min_positivity"] = pos;
  rep["eq_residuals"] = json::array({eq[0], eq[1], eq[2]});
  rep["K_residual"] = K;
  rep["max_abs_I"] = I;
  rep["max_abs_C"] = C;
  rep["structure_equations_hold"] = ok;
  ctx.write(rep);
  return ok ? 0 : 2;
}

inline int finsler_flow(const FinslerArgs& a, const Context& ctx) {
  const WeylSource src = weyl_source(a.structure);
  if (a.start.size() != 3) throw Error(ErrorCode::malformed_config, "--start needs x,y,phi");
  const ChartId id = a.chart.empty() ? default_chart(a.structure) : chart_from_string(a.chart);
  const UTBPoint start{id, {a.start[0], a.start[1]}, a.start[2]};
  const auto r = w1_flow_period(src, start, a.period_tol, {.step = a.h, .s_max = a.s_max});
  if (!a.csv.empty()) {
    std::ofstream os(a.csv, std::ios::binary);
    if (!os) throw Error(ErrorCode::io_failure, "cannot open '" + a.csv + "' for writing");
    os << "s,x,y,phi,chart,X,Y,Z\n";
    for (const auto& s : r.samples)
      os << format_double(s.s) << ',' << format_double(s.u.x[0]) << ',' << format_double(s.u.x[1]) << ','
         << format_double(s.u.phi) << ',' << to_string(s.u.chart) << ',' << format_double(s.P[0]) << ','
         << format_double(s.P[1]) << ',' << format_double(s.P[2]) << '\n';
    if (!os) throw Error(ErrorCode::io_failure, "write failed");
  }
  json rep = header("finsler flow");
  rep["structure"] = src.name();
  rep["start"] = {{"chart", std::string(to_string(id))}, {"x", vec(start.x)}, {"phi", start.phi}};
  rep["period"] = r.period;
  rep["period_error"] = std::abs(r.period - 2 * std::numbers::pi);
  rep["closure_error"] = r.err;
  rep["samples"] = r.samples.size();
  ctx.write(rep);
  return 0;
}

struct ValidateArgs {
  std::string suite = "identities";
  std::uint64_t seed = 7;
};

inline int validate(const ValidateArgs& a, const Context& ctx) {
  if (a.suite != "identities") throw Error(ErrorCode::malformed_config, "unknown suite '" + a.suite + "'");
  const auto checks = identities_suite(a.seed);
  json list = json::array();
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.pass;
    list.push_back({{"name", c.name}, {"operation", c.operation}, {"measured", c.measured}, {"tolerance", c.tolerance},
                    {"pass", c.pass}});
  }
  json rep = header("validate");
  rep["suite"] = a.suite;
  rep["seed"] = a.seed;
  rep["checks"] = list;
  rep["pass"] = all;
  ctx.write(rep);
  return all ? 0 : 2;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace detail;
  CLI::App app{"Projective and Weyl structures on surfaces", "projweyl"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out_file;
  app.add_option("-o,--out", out_file, "Write the report to this file instead of stdout");

  CompatArgs compat;
  auto* c = app.add_subcommand("compat-check", "Compatibility of a projective structure with a conformal structure");
  c->add_option("--config", compat.config, "JSON with \"f\", \"connection\" and optional \"chart\", \"route\"")
      ->required()
      ->check(CLI::ExistingFile);
  c->add_option("--route", compat.route)->check(CLI::IsMember({"isothermal", "least-squares"}));
  c->add_option("--grid", compat.grid)->check(CLI::Range(3, 10000));
  c->add_option("--tol", compat.tol)->check(CLI::PositiveNumber);
  c->add_option("--extent", compat.extent, "Half width of the sampled square")->check(CLI::NonNegativeNumber);
  c->add_flag("--points", compat.points, "Include per-point residuals");

  ConicArgs conic;
  auto* q = app.add_subcommand("conic", "Conic diagnostics");
  q->require_subcommand(1);
  auto* qc = q->add_subcommand("check", "Search the conic for real points");
  auto* qs = q->add_subcommand("section", "Fibre section over a unit vector");
  auto* qm = q->add_subcommand("metric", "Det-1 metric on a chart grid");
  for (auto* s : {qc, qs, qm}) s->add_option("--in", conic.in)->required()->check(CLI::ExistingFile);
  qs->add_option("--u", conic.u, "x,y,z")->delimiter(',')->expected(3)->required();
  qm->add_option("--chart", conic.chart)->check(CLI::IsMember({"north", "south", "gnomonic"}));
  qm->add_option("--grid", conic.grid)->check(CLI::Range(3, 10000));

  auto* wc = app.add_subcommand("weyl-from-conic", "Weyl structure induced by a conic, with its compatibility residual");
  wc->add_option("--in", conic.in)->required()->check(CLI::ExistingFile);
  wc->add_option("--chart", conic.chart)->check(CLI::IsMember({"north", "south", "gnomonic"}));
  wc->add_option("--grid", conic.grid)->check(CLI::Range(3, 10000));
  wc->add_option("--tol", conic.tol)->check(CLI::PositiveNumber);
  wc->add_flag("--points", conic.points);

  GeodesicArgs geo;
  auto* g = app.add_subcommand("geodesics", "Integrate one geodesic and emit it as CSV or JSON");
  geo.structure.add(g);
  g->add_option("--chart", geo.chart);
  g->add_option("--start", geo.start, "x,y,vx,vy")->delimiter(',')->expected(4)->required();
  g->add_option("--step", geo.h)->check(CLI::PositiveNumber);
  g->add_option("--s-max", geo.s_max)->check(CLI::PositiveNumber);
  g->add_option("--stride", geo.stride)->check(CLI::PositiveNumber);
  g->add_option("--emit", geo.emit)->check(CLI::IsMember({"csv", "json"}));

  ZollArgs zoll;
  auto* z = app.add_subcommand("zoll-test", "Closure and great-circle test for geodesics");
  zoll.structure.add(z);
  z->add_option("--chart", zoll.chart);
  z->add_option("--start", zoll.start, "x,y,vx,vy")->delimiter(',')->expected(4);
  z->add_option("--starts", zoll.starts, "Number of random starts")->check(CLI::Range(1, 100000));
  z->add_option("--seed", zoll.seed);
  z->add_option("--step", zoll.h)->check(CLI::PositiveNumber);
  z->add_option("--s-max", zoll.s_max)->check(CLI::PositiveNumber);
  z->add_option("--tol", zoll.tol)->check(CLI::PositiveNumber);
  z->add_option("--plane-tol", zoll.plane_tol)->check(CLI::PositiveNumber);

  FinslerArgs fin;
  auto* f = app.add_subcommand("finsler", "Finsler coframe diagnostics");
  f->require_subcommand(1);
  auto* fi = f->add_subcommand("invariants", "Structure-equation residuals and I, C at random unit tangent vectors");
  auto* ff = f->add_subcommand("flow", "Period of the W1 flow");
  for (auto* s : {fi, ff}) fin.structure.add(s);
  fi->add_option("--samples", fin.samples)->check(CLI::Range(1, 10000000));
  fi->add_option("--seed", fin.seed);
  fi->add_option("--tol", fin.tol)->check(CLI::PositiveNumber);
  ff->add_option("--chart", fin.chart);
  ff->add_option("--start", fin.start, "x,y,phi")->delimiter(',')->expected(3)->required();
  ff->add_option("--step", fin.h)->check(CLI::PositiveNumber);
  ff->add_option("--s-max", fin.s_max)->check(CLI::PositiveNumber);
  ff->add_option("--tol", fin.period_tol)->check(CLI::PositiveNumber);
  ff->add_option("--csv", fin.csv, "Write the trajectory as CSV");

  ValidateArgs val;
  auto* v = app.add_subcommand("validate", "Seeded self-test suites");
  v->add_option("--suite", val.suite)->check(CLI::IsMember({"identities"}));
  v->add_option("--seed", val.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  const Context ctx{out, err, out_file};
  std::string command;
  try {
    if (c->parsed()) return (command = "compat-check", compat_check(compat, ctx));
    if (qc->parsed()) return (command = "conic check", conic_check(conic, ctx));
    if (qs->parsed()) return (command = "conic section", conic_section(conic, ctx));
    if (qm->parsed()) return (command = "conic metric", conic_metric(conic, ctx));
    if (wc->parsed()) return (command = "weyl-from-conic", weyl_from_conic(conic, ctx));
    if (g->parsed()) return (command = "geodesics", geodesics(geo, ctx));
    if (z->parsed()) return (command = "zoll-test", zoll_test(zoll, ctx));
    if (fi->parsed()) return (command = "finsler invariants", finsler_invariants(fin, ctx));
    if (ff->parsed()) return (command = "finsler flow", finsler_flow(fin, ctx));
    if (v->parsed()) return (command = "validate", validate(val, ctx));
  } catch (const Error& e) {
    if (is_verdict(e.code())) {
      json rep = header(command);
      rep["error"] = to_string(e.code());
      rep["message"] = e.what();
      try {
        ctx.write(rep);
      } catch (const Error&) {
      }
      return 2;
    }
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed-config: " << e.what() << '\n';
    return 1;
  }
  err << "error: no command\n";
  return 1;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"projweyl"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace projweyl::cli

#endif  // PROJWEYL_CLI_HPP
