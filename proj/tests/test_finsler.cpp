#include <catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "projweyl/finsler.hpp"

using namespace projweyl;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool has_code(const std::function<void()>& fn, ErrorCode code) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

double max_abs_diff(const Mat3<double>& a, const Mat3<double>& b) {
  double m = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

// Closed-form isothermal coframe rows.
Mat3<double> alpha_oracle(const ScalarField& f, const Vec2<double>& p, double phi) {
  const ScalarJet j = eval_jet(f, Chart{ChartId::planar}, p, 1);
  const double e = std::exp(j.value), c = std::cos(phi), s = std::sin(phi);
  return {{{e * c, e * s, 0.0}, {-e * s, e * c, 0.0}, {-j.grad[1], j.grad[0], 1.0}}};
}

Conic diag123() { return Conic(Mat3<double>{{{1, 0, 0}, {0, 2, 0}, {0, 0, 3}}}, Mat3<double>{}); }

Conic offdiag() {
  Mat3<double> B{};
  B[0][1] = B[1][0] = 0.3;
  return Conic(Conic::identity3(), B);
}

ScalarField test_poly() { return polynomial_factor(Polynomial({{0.1, 0.2, -0.1}, {0.3, 0.05}, {-0.2}})); }

}  // namespace

TEST_CASE("riemannian_coframe examples", "[finsler_duality]") {
  const UTBPoint u0{ChartId::planar, {0.4, -0.3}, 0.7};
  const Mat3<double> flat = riemannian_coframe(flat_factor(), u0).m;
  CHECK(max_abs_diff(flat, {{{std::cos(0.7), std::sin(0.7), 0}, {-std::sin(0.7), std::cos(0.7), 0}, {0, 0, 1}}}) < 1e-14);

  const Mat3<double> origin = riemannian_coframe(round_factor(), {ChartId::planar, {0, 0}, 1.1}).m;
  CHECK(std::abs(origin[2][0]) < 1e-14);
  CHECK(std::abs(origin[2][1]) < 1e-14);
  CHECK(origin[2][2] == 1.0);

  const Mat3<double> at10 = riemannian_coframe(round_factor(), {ChartId::planar, {1, 0}, 0.0}).m;
  CHECK(std::abs(at10[2][0]) < 1e-14);
  CHECK(std::abs(at10[2][1] + 1.0) < 1e-14);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.8, 0.8), a(0.0, kTwoPi);
  for (const auto& f : {round_factor(), bump_factor(0.4), test_poly()})
    for (int n = 0; n < 50; ++n) {
      const Vec2<double> p = {u(rng), u(rng)};
      const double phi = a(rng);
      CHECK(max_abs_diff(riemannian_coframe(f, {ChartId::planar, p, phi}).m, alpha_oracle(f, p, phi)) < 1e-12);
    }
}

TEST_CASE("gauss_curvature examples", "[finsler_duality]") {
  const Chart plane{ChartId::planar};
  CHECK(gauss_curvature(eval_jet(flat_factor(), plane, {0.3, 0.2}, 2)) == 0.0);
  for (const Vec2<double> p : {Vec2<double>{0, 0}, {0.7, -1.2}, {2.0, 3.0}})
    CHECK(std::abs(gauss_curvature(eval_jet(round_factor(), plane, p, 2)) - 1.0) < 1e-9);
  for (const Vec2<double> p : {Vec2<double>{0, 0}, {0.3, -0.5}, {0.6, 0.6}})
    CHECK(std::abs(gauss_curvature(eval_jet(hyperbolic_factor(), plane, p, 2)) + 1.0) < 1e-9);

  // Frame curvature agrees on isothermal charts and on the round metric in every sphere chart.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  const auto f = test_poly();
  const auto w = WeylStructureChart::conformal(f, zero_oneform());
  for (int n = 0; n < 50; ++n) {
    const Vec2<double> p = {u(rng), u(rng)};
    CHECK(std::abs(frame_geometry<0>(w, p).R.value() - gauss_curvature(eval_jet(f, plane, p, 2))) < 1e-10);
  }
  for (ChartId id : {ChartId::north, ChartId::south, ChartId::gnomonic}) {
    const MetricField round("round", [id](auto order, const Vec2<double>& p) {
      return round_metric<decltype(order)::value>(id, p);
    });
    const auto g = WeylStructureChart::general(round, zero_oneform(), id);
    for (int n = 0; n < 20; ++n) CHECK(std::abs(frame_geometry<0>(g, {u(rng), u(rng)}).R.value() - 1.0) < 1e-10);
  }
}

TEST_CASE("codifferential examples", "[finsler_duality]") {
  const Chart plane{ChartId::planar};
  const ScalarJet f0 = eval_jet(flat_factor(), plane, {0.5, 0.2}, 2);
  CHECK(codifferential(eval_jet(constant_oneform(1, 0), plane, {0.5, 0.2}, 1), f0) == 0.0);
  const auto xdx = polynomial_oneform(Polynomial({{0.0}, {1.0}}), Polynomial());
  CHECK(codifferential(eval_jet(xdx, plane, {0.5, 0.2}, 1), f0) == 1.0);
  CHECK(codifferential(eval_jet(zero_oneform(), plane, {0.5, 0.2}, 1), f0) == 0.0);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  const auto beta = polynomial_oneform(Polynomial({{0.2, 0.5}, {-0.3, 0.1}}), Polynomial({{0.1}, {0.4, 0.2}}));
  const auto f = bump_factor(0.3);
  const auto w = WeylStructureChart::conformal(f, beta);
  for (int n = 0; n < 50; ++n) {
    const Vec2<double> p = {u(rng), u(rng)};
    const double expect = codifferential(eval_jet(beta, plane, p, 1), eval_jet(f, plane, p, 0));
    CHECK(std::abs(frame_geometry<0>(w, p).delta_beta.value() - expect) < 1e-12);
  }
}

TEST_CASE("positivity examples", "[finsler_duality]") {
  const Chart plane{ChartId::planar};
  auto all = [](const Vec2<double>&) { return true; };
  const auto grid = chart_grid(plane, 21, all);
  const auto round = positivity(round_factor(), zero_oneform(), grid);
  CHECK(std::abs(round.min_value - 1.0) < 1e-9);
  CHECK(round.positive);

  const auto flat = positivity(flat_factor(), zero_oneform(), grid);
  CHECK(flat.min_value == 0.0);
  CHECK_FALSE(flat.positive);

  const auto disc = chart_grid(plane, 21, [](const Vec2<double>& p) { return p[0] * p[0] + p[1] * p[1] < 0.8; });
  const auto hyper = positivity(hyperbolic_factor(), zero_oneform(), disc);
  CHECK(std::abs(hyper.min_value + 1.0) < 1e-9);
  CHECK_FALSE(hyper.positive);

  // Verdict is unchanged under (e^{2u} g, beta + du); the value scales by e^{-2u}.
  const auto beta = polynomial_oneform(Polynomial({{0.2, 0.1}}), Polynomial({{-0.1}, {0.3}}));
  const auto w = WeylStructureChart::conformal(round_factor(), beta);
  auto w2 = w;
  w2.factor = polynomial_factor(Polynomial({{0.0}, {0.3, 0.2}}));
  w2.shape = conformal_metric(round_factor());
  w2.beta = polynomial_oneform(Polynomial({{0.5, 0.3}}), Polynomial({{-0.1}, {0.5}}));
  for (const auto& p : grid) {
    const double scale_factor = std::exp(-2.0 * (0.3 * p[0] + 0.2 * p[0] * p[1]));
    CHECK(std::abs(positivity_value(w2, p) - scale_factor * positivity_value(w, p)) < 1e-10);
  }
  CHECK(positivity(w, grid).positive == positivity(w2, grid).positive);
}

TEST_CASE("finsler_coframe examples", "[finsler_duality]") {
  const UTBPoint u{ChartId::planar, {0.3, -0.4}, 2.0};
  const Mat3<double> a = riemannian_coframe(round_factor(), u).m;
  const Mat3<double> w = finsler_coframe(round_factor(), zero_oneform(), u).m;
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(w[0][i] + a[2][i]) < 1e-12);
    CHECK(std::abs(w[1][i] - a[1][i]) < 1e-12);
    CHECK(std::abs(w[2][i] - a[0][i]) < 1e-12);
  }
  CHECK(has_code([&] { finsler_coframe(flat_factor(), zero_oneform(), u); }, ErrorCode::positivity_violated));
}

TEST_CASE("Riemannian structure equations hold", "[finsler_duality]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.8, 0.8), a(0.0, kTwoPi);
  std::vector<WeylStructureChart> metrics = {WeylStructureChart::conformal(round_factor(), zero_oneform()),
                                             WeylStructureChart::conformal(bump_factor(0.5), zero_oneform()),
                                             WeylStructureChart::conformal(test_poly(), zero_oneform())};
  const ConicStructure q(offdiag());
  metrics.push_back(q.weyl(ChartId::north));
  double worst = 0.0;
  for (const auto& w : metrics)
    for (int n = 0; n < 200; ++n) {
      const UTBPoint pt{w.chart, {u(rng), u(rng)}, a(rng)};
      for (double r : riemannian_structure_residuals(w, pt)) worst = std::max(worst, r);
    }
  CHECK(worst < 1e-5);
}

TEST_CASE("positivity identity pins the sign conventions", "[finsler_duality]") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-0.8, 0.8), a(0.0, kTwoPi);
  const auto beta = polynomial_oneform(Polynomial({{0.2, 0.5}, {-0.3, 0.1}}), Polynomial({{0.1}, {0.4, 0.2}}));
  const std::vector<WeylStructureChart> ws = {WeylStructureChart::conformal(bump_factor(0.3), beta),
                                              WeylStructureChart::conformal(hyperbolic_factor(), beta),
                                              ConicStructure(diag123()).weyl(ChartId::south)};
  double worst = 0.0;
  for (const auto& w : ws)
    for (int n = 0; n < 100; ++n) {
      const Vec2<double> p = w.chart == ChartId::planar && w.factor.name() == "hyperbolic"
                                 ? Vec2<double>{0.6 * u(rng), 0.6 * u(rng)}
                                 : Vec2<double>{u(rng), u(rng)};
      worst = std::max(worst, positivity_identity_residual(w, {w.chart, p, a(rng)}));
    }
  CHECK(worst < 1e-5);
}

TEST_CASE("coframe_invariants examples", "[finsler_duality]") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-0.8, 0.8), a(0.0, kTwoPi);

  for (int n = 0; n < 20; ++n) {
    const auto inv = coframe_invariants(round_factor(), zero_oneform(), {ChartId::planar, {u(rng), u(rng)}, a(rng)});
    CHECK(std::abs(inv.I) < 1e-6);
    CHECK(std::abs(inv.C) < 1e-6);
    CHECK(inv.K_residual < 1e-6);
  }

  // Positively curved but not constant curvature, beta = 0: s = sqrt(R) varies,
  // so I and C follow its gradient rather than vanishing.
  const auto lumpy = WeylStructureChart::conformal(
      polynomial_factor(Polynomial({{0.0, 0.0, -0.3}, {0.05}, {-0.5}})), zero_oneform());
  double spread = 0.0;
  for (int n = 0; n < 20; ++n) {
    const UTBPoint pt{ChartId::planar, {0.5 * u(rng), 0.5 * u(rng)}, a(rng)};
    const auto inv = coframe_invariants(lumpy, pt);
    const auto closed = invariants_closed_form(lumpy, pt);
    CHECK(std::max(inv.eq_residuals[0], std::max(inv.eq_residuals[1], inv.eq_residuals[2])) < 1e-4);
    CHECK(std::abs(inv.I - closed[0]) < 1e-6);
    CHECK(std::abs(inv.C - closed[1]) < 1e-6);
    spread = std::max(spread, std::abs(inv.I) + std::abs(inv.C));
  }
  CHECK(spread > 1e-3);

  const ConicStructure q(offdiag());
  const auto src = WeylSource::from_conic(q);
  double worst = 0.0, nonzero = 0.0;
  for (ChartId id : {ChartId::north, ChartId::south, ChartId::gnomonic})
    for (int n = 0; n < 10; ++n) {
      const UTBPoint pt{id, {u(rng), u(rng)}, a(rng)};
      const auto inv = coframe_invariants(src.chart(id), pt);
      const auto closed = invariants_closed_form(src.chart(id), pt);
      for (double r : inv.eq_residuals) worst = std::max(worst, r);
      CHECK(std::abs(inv.I - closed[0]) < 1e-6);
      CHECK(std::abs(inv.C - closed[1]) < 1e-6);
      nonzero = std::max(nonzero, std::max(std::abs(inv.I), std::abs(inv.C)));
    }
  CHECK(worst < 1e-4);
  CHECK(nonzero > 1e-3);
}

TEST_CASE("Finsler structure equations for conic structures", "[finsler_duality]") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-1.0, 1.0), a(0.0, kTwoPi);
  for (const Conic& c : std::vector<Conic>{Conic(Conic::identity3(), Mat3<double>{}), diag123(), offdiag()}) {
    const auto src = WeylSource::from_conic(ConicStructure(c));
    double worst = 0.0;
    for (int n = 0; n < 30; ++n) {
      const ChartId id = n % 2 ? ChartId::north : ChartId::south;
      const auto inv = coframe_invariants(src.chart(id), {id, {u(rng), u(rng)}, a(rng)});
      for (double r : inv.eq_residuals) worst = std::max(worst, r);
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("coframe is representative independent", "[finsler_duality]") {
  const auto beta = polynomial_oneform(Polynomial({{0.2, 0.1}}), Polynomial({{-0.1}, {0.3}}));
  const auto w = WeylStructureChart::conformal(round_factor(), beta);
  // u = 0.3 x + 0.2 x y, du = (0.3 + 0.2 y) dx + 0.2 x dy
  WeylStructureChart w2{ChartId::planar, polynomial_factor(Polynomial({{0.0}, {0.3, 0.2}})),
                        conformal_metric(round_factor()),
                        polynomial_oneform(Polynomial({{0.5, 0.3}}), Polynomial({{-0.1}, {0.5}}))};
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-0.8, 0.8), a(0.0, kTwoPi);
  for (int n = 0; n < 50; ++n) {
    const UTBPoint pt{ChartId::planar, {u(rng), u(rng)}, a(rng)};
    CHECK(max_abs_diff(finsler_coframe(w, pt).m, finsler_coframe(w2, pt).m) < 1e-6);
  }
}

TEST_CASE("w1_flow_period examples", "[finsler_duality]") {
  const auto round = WeylSource::conformal(round_factor());
  const auto r = w1_flow_period(round, {ChartId::planar, {0.3, 0.2}, 0.4});
  CHECK(std::abs(r.period - kTwoPi) < 1e-8);
  const auto w1 = w1_field(round, {ChartId::planar, {0.3, 0.2}, 0.4});
  CHECK(std::abs(w1[0]) < 1e-15);
  CHECK(std::abs(w1[1]) < 1e-15);
  CHECK(std::abs(w1[2] + 1.0) < 1e-15);

  const auto conic = WeylSource::from_conic(ConicStructure(diag123()));
  const auto c = w1_flow_period(conic, {ChartId::north, {0.2, -0.3}, 1.0});
  CHECK(std::abs(c.period - kTwoPi) < 1e-3);
  // omega_2 and omega_3 are semibasic, so W1 is vertical and only turns the fibre.
  for (const auto& s : c.samples) CHECK(norm(s.P - c.samples.front().P) < 1e-12);

  CHECK(has_code([] { w1_flow_period(WeylSource::conformal(hyperbolic_factor()), {ChartId::planar, {0.1, 0.1}, 0.0}); },
                 ErrorCode::positivity_violated));
  CHECK(has_code([] { w1_flow_period(WeylSource::conformal(round_factor()), {ChartId::planar, {0.1, 0.1}, 0.0}, 1e-6,
                                     {.s_max = 3.0}); },
                 ErrorCode::no_return));
}
