#ifndef PROJWEYL_VALIDATE_HPP
#define PROJWEYL_VALIDATE_HPP

// Seeded self-test suites: each check names the operation it exercises, the
// measured residual and the tolerance it is held to.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "projweyl/compatibility.hpp"
#include "projweyl/connection.hpp"
#include "projweyl/finsler.hpp"
#include "projweyl/flat_model.hpp"
#include "projweyl/geodesic.hpp"

namespace projweyl {

struct ValidationCheck {
  std::string name;
  std::string operation;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

namespace detail {

inline ValidationCheck check(std::string name, std::string op, double measured, double tol) {
  return {std::move(name), std::move(op), measured, tol, std::isfinite(measured) && measured < tol};
}

inline double uniform(std::mt19937_64& rng, double a, double b) {
  return a + (b - a) * std::generate_canonical<double, 53>(rng);
}

inline Christoffel<double> random_christoffel(std::mt19937_64& rng) {
  Christoffel<double> g{};
  for (auto& a : g)
    for (auto& b : a)
      for (auto& c : b) c = uniform(rng, -1.0, 1.0);
  return g;
}

inline Mat3<double> random_unimodular(std::mt19937_64& rng) {
  for (;;) {
    Mat3<double> g;
    for (auto& r : g)
      for (auto& v : r) v = uniform(rng, -1.0, 1.0);
    const double d = det(g);
    if (std::abs(d) < 0.05) continue;
    const double s = std::cbrt(d);
    for (auto& r : g)
      for (auto& v : r) v /= s;
    return g;
  }
}

// Det-normalised Gram matrix of the class of tau(g), computed from the
// columns of g in the decode basis: v_i = proj_{u^perp}(g_i) / |g_0| are
// declared orthonormal, so the metric is the inverse Gram of their coordinates.
inline Mat2<double> gram_oracle(const Mat3<double>& g, const std::array<Vec3<double>, 2>& basis) {
  const Vec3<double> g0 = column(g, 0);
  const double n0 = norm(g0);
  const Vec3<double> u = scale(g0, 1.0 / n0);
  Mat2<double> M;
  for (int i = 0; i < 2; ++i) {
    const Vec3<double> gi = column(g, i + 1);
    const Vec3<double> v = scale(gi - scale(u, dot(u, gi)), 1.0 / n0);
    for (int k = 0; k < 2; ++k) M[k][i] = dot(v, basis[k]);
  }
  Mat2<double> gram{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int l = 0; l < 2; ++l) gram[i][j] += M[i][l] * M[j][l];
  return det_normalized(inverse(gram));
}

inline double max_abs(const Mat2<double>& a, const Mat2<double>& b) {
  double m = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

}  // namespace detail

/// Test conics without real points: I, diag(1, 2, 3) and I + 0.3 i (e1 e2^T + e2 e1^T).
inline std::vector<std::pair<std::string, Conic>> admissible_test_conics() {
  Mat3<double> B{};
  B[0][1] = B[1][0] = 0.3;
  return {{"identity", Conic(Conic::identity3(), Mat3<double>{})},
          {"diag123", Conic(Mat3<double>{{{1, 0, 0}, {0, 2, 0}, {0, 0, 3}}}, Mat3<double>{})},
          {"offdiag", Conic(Conic::identity3(), B)}};
}

inline std::vector<ValidationCheck> identities_suite(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto U = [&](double a, double b) { return detail::uniform(rng, a, b); };
  std::vector<ValidationCheck> out;

  {
    double kappa = 0.0, beta = 0.0;
    for (const auto& f : {round_factor(), bump_factor(0.5), polynomial_factor(Polynomial({{0.1, U(-1, 1)}, {U(-1, 1)}}))}) {
      const auto lc = levi_civita_field(conformal_metric(f));
      const Chart plane{ChartId::planar};
      for (const auto& p : chart_grid(plane, 9, [](const Vec2<double>&) { return true; })) {
        const ScalarJet fj = eval_jet(f, plane, p, 2);
        const auto r = kappa_residual(fj, lc(ChartId::planar, p));
        kappa = std::max(kappa, std::hypot(r[0], r[1]));
        const auto b = construct_beta(fj, lc(ChartId::planar, p));
        beta = std::max(beta, std::hypot(b.b[0], b.b[1]));
      }
    }
    out.push_back(detail::check("isothermal_kappa_identity", "kappa_residual", kappa, 1e-10));
    out.push_back(detail::check("levi_civita_beta_vanishes", "construct_beta", beta, 1e-10));
  }

  {
    double pi = 0.0, rec = 0.0;
    for (int n = 0; n < 100; ++n) {
      const ConnectionCoeffs c(detail::random_christoffel(rng));
      const EpsilonForm e{{U(-1, 1), U(-1, 1)}};
      const auto m = epsilon_modify(c, e);
      pi = std::max(pi, projectively_equivalent(c, m).pi_difference);
      const auto r = recover_epsilon(c, m);
      rec = std::max(rec, std::max(std::abs(r.e[0] - e.e[0]), std::abs(r.e[1] - e.e[1])));
    }
    out.push_back(detail::check("projective_invariance", "projective_invariants", pi, 1e-12));
    out.push_back(detail::check("epsilon_recovery", "recover_epsilon", rec, 1e-12));
  }

  {
    double dec = 0.0, fib = 0.0;
    for (int n = 0; n < 50; ++n) {
      const auto g = detail::random_unimodular(rng);
      const auto d = decode_conformal(tau(g));
      dec = std::max(dec, detail::max_abs(d.G, detail::gram_oracle(g, d.basis)));
    }
    for (const auto& [name, q] : admissible_test_conics())
      for (int n = 0; n < 50; ++n) {
        const Vec3<double> u = normalized(Vec3<double>{U(-1, 1), U(-1, 1), U(-1, 1)});
        fib = std::max(fib, norm(rho(fiber_section(q, u)) - u));
      }
    out.push_back(detail::check("decode_tau_gram_oracle", "decode_conformal", dec, 1e-10));
    out.push_back(detail::check("rho_fiber_section_identity", "fiber_section", fib, 1e-9));
  }

  {
    double geo = 0.0;
    const auto base = weyl_field(conformal_metric(bump_factor(0.3)), constant_oneform(0.2, -0.1));
    for (int n = 0; n < 3; ++n) {
      const Vec2<double> e = {U(-0.3, 0.3), U(-0.3, 0.3)};
      const auto eps = constant_oneform(e[0], e[1]);
      const double th = U(0, 2 * std::numbers::pi);
      const GeodesicState st{ChartId::planar, {U(-0.5, 0.5), U(-0.5, 0.5)}, {std::cos(th), std::sin(th)}, 0.0};
      geo = std::max(geo, unparametrized_deviation(integrate(base, st, 2.5e-4, 1.0),
                                                   integrate(epsilon_modified(base, eps), st, 2.5e-4, 1.0)));
    }
    out.push_back(detail::check("geodesics_projectively_invariant", "unparametrized_deviation", geo, 1e-6));
  }

  {
    double riem = 0.0, ident = 0.0, fins = 0.0, ic = 0.0;
    const auto beta = polynomial_oneform(Polynomial({{0.2, 0.5}, {-0.3}}), Polynomial({{0.1}, {0.4, 0.2}}));
    const std::vector<WeylStructureChart> ws = {WeylStructureChart::conformal(round_factor(), beta),
                                                WeylStructureChart::conformal(bump_factor(0.4), beta)};
    for (const auto& w : ws)
      for (int n = 0; n < 20; ++n) {
        const UTBPoint u{w.chart, {U(-0.8, 0.8), U(-0.8, 0.8)}, U(0, 2 * std::numbers::pi)};
        for (double r : riemannian_structure_residuals(w, u)) riem = std::max(riem, r);
        ident = std::max(ident, positivity_identity_residual(w, u));
      }
    const auto src = WeylSource::from_conic(ConicStructure(admissible_test_conics()[2].second));
    for (int n = 0; n < 20; ++n) {
      const ChartId id = n % 2 ? ChartId::north : ChartId::south;
      const UTBPoint u{id, {U(-1, 1), U(-1, 1)}, U(0, 2 * std::numbers::pi)};
      const auto inv = coframe_invariants(src.chart(id), u);
      for (double r : inv.eq_residuals) fins = std::max(fins, r);
      const auto cf = invariants_closed_form(src.chart(id), u);
      ic = std::max(ic, std::max(std::abs(inv.I - cf[0]), std::abs(inv.C - cf[1])));
    }
    out.push_back(detail::check("riemannian_structure_equations", "riemannian_coframe", riem, 1e-5));
    out.push_back(detail::check("positivity_identity", "codifferential", ident, 1e-5));
    out.push_back(detail::check("finsler_structure_equations", "coframe_invariants", fins, 1e-4));
    out.push_back(detail::check("finsler_invariants_closed_form", "coframe_invariants", ic, 1e-6));
  }

  {
    const auto r = w1_flow_period(WeylSource::conformal(round_factor()), {ChartId::planar, {U(-1, 1), U(-1, 1)}, U(0, 6)});
    out.push_back(detail::check("w1_period_round", "w1_flow_period", std::abs(r.period - 2 * std::numbers::pi), 1e-8));
  }
  return out;
}

}  // namespace projweyl

#endif  // PROJWEYL_VALIDATE_HPP
