#ifndef PROJWEYL_COMPATIBILITY_HPP
#define PROJWEYL_COMPATIBILITY_HPP

// Compatibility of a conformal structure with a projective structure.
//
// Two routes:
//   * isothermal charts (g = e^{2f} delta): the kappa conditions
//     3 kappa1 = kappa3, 3 kappa2 = kappa0, and beta = -kappa3 dx + kappa0 dy + df;
//   * any chart: least squares for beta in Pi(weyl(g, beta)) = Pi(target).
//     Pi is linear in beta because the eps-type terms of the Weyl formula drop
//     out, leaving Pi(Gamma_LC) + Pi(g_kl b^i).

#include <cmath>
#include <string>
#include <vector>

#include "projweyl/charts.hpp"
#include "projweyl/connection.hpp"
#include "projweyl/error.hpp"
#include "projweyl/fields.hpp"
#include "projweyl/jet.hpp"
#include "projweyl/linalg.hpp"

namespace projweyl {

inline constexpr double kCompatibilityTolerance = 1e-7;

/// (3 kappa1 - kappa3, 3 kappa2 - kappa0) of proj; f names the isothermal
/// factor of the chart and does not enter.
inline Vec2<double> kappa_residual(const ScalarJet& /*f*/, const ConnectionCoeffs& proj) {
  const auto k = kappa_t(proj.gamma);
  return {3.0 * k[1] - k[3], 3.0 * k[2] - k[0]};
}

inline OneFormJet construct_beta(const ScalarJet& f, const ConnectionCoeffs& proj,
                                 double tol = kCompatibilityTolerance) {
  const Vec2<double> r = kappa_residual(f, proj);
  if (std::hypot(r[0], r[1]) > tol) throw Error(ErrorCode::incompatible_input, "kappa conditions fail");
  const auto k = kappa_t(proj.gamma);
  OneFormJet b;
  b.order = 0;
  b.b = {-k[3] + f.grad[0], k[0] + f.grad[1]};
  if (proj.dgamma && f.order >= 2) {
    b.order = 1;
    for (int m = 0; m < 2; ++m) {
      const auto dk = kappa_t((*proj.dgamma)[m]);
      b.db[m][0] = -dk[3] + f.hess[m][0];
      b.db[m][1] = dk[0] + f.hess[m][1];
    }
  }
  return b;
}

// ---------------------------------------------------------------------------
// Least-squares route.

template <class T>
struct LeastSquaresSystem {
  // Columns: Pi of g_kl (g^{-1} e_j)^i for j = 0, 1.  rhs: target - Pi(Gamma_LC).
  std::array<Christoffel<T>, 2> column;
  Christoffel<T> rhs;
};

template <class T>
LeastSquaresSystem<T> least_squares_system(const Mat2<T>& g, const std::array<Mat2<T>, 2>& dg, const Christoffel<T>& target_pi) {
  LeastSquaresSystem<T> s;
  const Mat2<T> gi = inverse(g);
  for (int j = 0; j < 2; ++j) {
    Christoffel<T> c;
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) c[i][k][l] = g[k][l] * gi[i][j];
    s.column[j] = projective_pi_t(c);
  }
  const Christoffel<T> lc = projective_pi_t(levi_civita_t(g, dg));
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) s.rhs[i][k][l] = target_pi[i][k][l] - lc[i][k][l];
  return s;
}

/// Normal-equation solution of the 8 x 2 system; works on jets so that beta
/// inherits derivatives from g and the target.
template <class T>
Vec2<T> solve_least_squares_t(const LeastSquaresSystem<T>& s) {
  Mat2<T> n;
  Vec2<T> r;
  for (int a = 0; a < 2; ++a) {
    r[a] = 0.0 * s.rhs[0][0][0];
    for (int b = 0; b < 2; ++b) n[a][b] = 0.0 * s.rhs[0][0][0];
  }
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l)
        for (int a = 0; a < 2; ++a) {
          r[a] += s.column[a][i][k][l] * s.rhs[i][k][l];
          for (int b = 0; b < 2; ++b) n[a][b] += s.column[a][i][k][l] * s.column[b][i][k][l];
        }
  if (!(std::abs(value_of(det(n))) > 1e-14)) throw Error(ErrorCode::singular_normal_equations, "least-squares system is singular");
  return matvec(inverse(n), r);
}

template <class T>
double least_squares_residual(const LeastSquaresSystem<T>& s, const Vec2<T>& beta) {
  double acc = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) {
        const double e = value_of(s.rhs[i][k][l] - s.column[0][i][k][l] * beta[0] - s.column[1][i][k][l] * beta[1]);
        acc += e * e;
      }
  return std::sqrt(acc);
}

struct LeastSquaresBeta {
  Vec2<double> beta{};
  double residual = 0.0;  // Euclidean norm of the Pi mismatch over all 8 entries
};

inline LeastSquaresBeta solve_beta_least_squares(const MetricJet& m, const ProjectiveData& proj_pi) {
  require_positive_definite(m.g);
  const auto s = least_squares_system(m.g, m.dg, proj_pi.pi);
  LeastSquaresBeta out;
  out.beta = solve_least_squares_t(s);
  out.residual = least_squares_residual(s, out.beta);
  return out;
}

// ---------------------------------------------------------------------------
// Weyl structures on a chart.

/// The pair (g, beta) with g = e^{2 factor} shape.
struct WeylStructureChart {
  ChartId chart = ChartId::planar;
  ScalarField factor = flat_factor();
  MetricField shape = conformal_metric(flat_factor());
  OneFormField beta = zero_oneform();

  static WeylStructureChart conformal(ScalarField f, OneFormField beta, ChartId chart = ChartId::planar) {
    return {chart, std::move(f), conformal_metric(flat_factor()), std::move(beta)};
  }
  static WeylStructureChart general(MetricField g, OneFormField beta, ChartId chart = ChartId::planar) {
    return {chart, flat_factor(), std::move(g), std::move(beta)};
  }

  MetricField metric() const {
    const auto f = factor;
    const auto g = shape;
    return MetricField(
        "exp(2 " + f.name() + ") " + g.name(),
        [f, g](auto order, const Vec2<double>& p) {
          constexpr int K = decltype(order)::value;
          const Jet<K> e = exp(2.0 * f.template evaluate<K>(p));
          auto m = g.template evaluate<K>(p);
          for (auto& row : m)
            for (auto& v : row) v = e * v;
          return m;
        },
        [f, g](const Vec2<double>& p) { return f.defined_at(p) && g.defined_at(p); });
  }

  ConnectionCoeffs connection(const Vec2<double>& p) const {
    const Chart c{chart, 0.0};
    return weyl_connection(eval_jet(metric(), c, p, 2), eval_jet(beta, c, p, 1));
  }
};

enum class NormalizeMode { det1, conformal_factor };

namespace detail {

// h = 1/4 ln det g at order K, from g at order K.
template <int K>
Jet<K> quarter_log_det(const Mat2<Jet<K>>& g) {
  return 0.25 * log(det(g));
}

}  // namespace detail

/// det1: (g, beta) -> (g / sqrt(det g), beta - dh) with h = 1/4 ln det g.
/// conformal_factor: same representative, re-split as e^{2 f'} G with det G = 1.
inline WeylStructureChart normalize_representative(const WeylStructureChart& w, NormalizeMode mode) {
  const auto shape = w.shape;
  const auto factor = w.factor;
  MetricField unimodular(
      "unimodular(" + shape.name() + ")",
      [shape](auto order, const Vec2<double>& p) {
        constexpr int K = decltype(order)::value;
        auto m = shape.template evaluate<K>(p);
        const Jet<K> s = pow(det(m), -0.5);
        for (auto& row : m)
          for (auto& v : row) v = s * v;
        return m;
      },
      [shape](const Vec2<double>& p) { return shape.defined_at(p); });
  ScalarField h(
      "h(" + shape.name() + ")",
      [shape](auto order, const Vec2<double>& p) {
        constexpr int K = decltype(order)::value;
        return detail::quarter_log_det<K>(shape.template evaluate<K>(p));
      },
      [shape](const Vec2<double>& p) { return shape.defined_at(p); });

  WeylStructureChart out = w;
  out.shape = unimodular;
  if (mode == NormalizeMode::conformal_factor) {
    out.factor = ScalarField(
        factor.name() + " + " + h.name(),
        [factor, h](auto order, const Vec2<double>& p) {
          constexpr int K = decltype(order)::value;
          return factor.template evaluate<K>(p) + h.template evaluate<K>(p);
        },
        [factor, h](const Vec2<double>& p) { return factor.defined_at(p) && h.defined_at(p); });
    return out;
  }
  out.factor = flat_factor();
  const auto beta = w.beta;
  out.beta = OneFormField(
      beta.name() + " - d(" + factor.name() + " + " + h.name() + ")",
      [beta, factor, h](auto order, const Vec2<double>& p) {
        constexpr int K = decltype(order)::value;
        if constexpr (K < kMaxFieldOrder) {
          const Jet<K + 1> s = factor.template evaluate<K + 1>(p) + h.template evaluate<K + 1>(p);
          auto b = beta.template evaluate<K>(p);
          b[0] = b[0] - s.derivative(0);
          b[1] = b[1] - s.derivative(1);
          return b;
        } else {
          throw Error(ErrorCode::order_unsupported, "normalized 1-form beyond maximum order");
          return Vec2<Jet<K>>{};
        }
      },
      [beta, factor, h](const Vec2<double>& p) { return beta.defined_at(p) && factor.defined_at(p) && h.defined_at(p); });
  return out;
}

// ---------------------------------------------------------------------------
// Grid sweeps.

/// n x n grid over the chart's sampling square, keeping points inside the
/// chart (with its margin) and the given domain.
template <class Domain>
std::vector<Vec2<double>> chart_grid(const Chart& chart, int n, const Domain& domain, double extent = 0.0) {
  if (n < 2) throw Error(ErrorCode::malformed_config, "grid size must be at least 2");
  const double e = extent > 0.0 ? extent : chart.grid_extent();
  std::vector<Vec2<double>> pts;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const Vec2<double> p = {-e + 2.0 * e * a / (n - 1), -e + 2.0 * e * b / (n - 1)};
      if (chart.contains(p) && domain(p)) pts.push_back(p);
    }
  return pts;
}

struct CompatibilityPoint {
  Vec2<double> p{};
  double residual = 0.0;
  Vec2<double> residual_kappa{};  // isothermal route only
  Vec2<double> beta{};
};

struct CompatibilityReport {
  std::string route;  // "isothermal" or "least-squares"
  ChartId chart = ChartId::planar;
  int grid = 0;
  double tolerance = kCompatibilityTolerance;
  std::vector<CompatibilityPoint> points;
  double max_residual = 0.0;
  bool compatible = false;
};

namespace detail {

inline void finish(CompatibilityReport& r) {
  r.max_residual = 0.0;
  for (const auto& q : r.points) r.max_residual = std::max(r.max_residual, q.residual);
  r.compatible = !r.points.empty() && r.max_residual < r.tolerance;
}

}  // namespace detail

/// Isothermal route: chart coordinates are isothermal for e^{2f} delta.
inline CompatibilityReport check_isothermal(const ScalarField& f, const ConnectionField& proj, const Chart& chart,
                                            int n = 33, double tol = kCompatibilityTolerance, double extent = 0.0) {
  CompatibilityReport r;
  r.route = "isothermal";
  r.chart = chart.id;
  r.grid = n;
  r.tolerance = tol;
  for (const auto& p : chart_grid(chart, n, [&f](const Vec2<double>& q) { return f.defined_at(q); }, extent)) {
    const ScalarJet fj = eval_jet(f, chart, p, 1);
    const ConnectionCoeffs c = proj(chart.id, p);
    CompatibilityPoint q;
    q.p = p;
    q.residual_kappa = kappa_residual(fj, c);
    q.residual = std::hypot(q.residual_kappa[0], q.residual_kappa[1]);
    const auto k = kappa_t(c.gamma);
    q.beta = {-k[3] + fj.grad[0], k[0] + fj.grad[1]};
    r.points.push_back(q);
  }
  detail::finish(r);
  return r;
}

/// Least-squares route on the det-1 representative of the conformal class of g.
inline CompatibilityReport check_least_squares(const MetricField& g, const ConnectionField& proj, const Chart& chart,
                                               int n = 33, double tol = kCompatibilityTolerance, double extent = 0.0) {
  const auto unimodular = normalize_representative(WeylStructureChart::general(g, zero_oneform(), chart.id), NormalizeMode::det1).shape;
  CompatibilityReport r;
  r.route = "least-squares";
  r.chart = chart.id;
  r.grid = n;
  r.tolerance = tol;
  for (const auto& p : chart_grid(chart, n, [&g](const Vec2<double>& q) { return g.defined_at(q); }, extent)) {
    const auto sol = solve_beta_least_squares(eval_jet(unimodular, chart, p, 1), projective_invariants(proj(chart.id, p)));
    CompatibilityPoint q;
    q.p = p;
    q.residual = sol.residual;
    q.beta = sol.beta;
    r.points.push_back(q);
  }
  detail::finish(r);
  return r;
}

}  // namespace projweyl

#endif  // PROJWEYL_COMPATIBILITY_HPP
