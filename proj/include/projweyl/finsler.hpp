#ifndef PROJWEYL_FINSLER_HPP
#define PROJWEYL_FINSLER_HPP

// Coframes on the unit tangent bundle of a Weyl structure (g, beta):
// the Riemannian coframe (alpha_1, alpha_2, alpha_3) of g and the Finsler
// coframe omega_1 = *beta - alpha_3, omega_2 = s alpha_2, omega_3 = s alpha_1
// with s = sqrt(delta beta + R).  Fibres are parametrised by the angle phi
// against the Cholesky orthonormal frame of g, so the same formulas serve
// isothermal charts and general metrics.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "projweyl/charts.hpp"
#include "projweyl/compatibility.hpp"
#include "projweyl/error.hpp"
#include "projweyl/fields.hpp"
#include "projweyl/flat_model.hpp"
#include "projweyl/jet.hpp"
#include "projweyl/linalg.hpp"

namespace projweyl {

struct UTBPoint {
  ChartId chart = ChartId::planar;
  Vec2<double> x{};
  double phi = 0.0;
};

/// Rows are the three one-forms, columns their dx, dy, dphi components.
struct CoframeSample {
  Mat3<double> m{};
};

struct CoframeInvariants {
  double I = 0.0;
  double C = 0.0;
  double K_residual = 0.0;
  std::array<double, 3> eq_residuals{};
};

inline constexpr double kCoframeStep = 1e-4;

/// A Weyl structure given chart by chart.
class WeylSource {
 public:
  WeylSource(std::string name, std::vector<WeylStructureChart> charts)
      : name_(std::move(name)), charts_(std::move(charts)) {}

  static WeylSource conformal(ScalarField f, OneFormField beta = zero_oneform(), ChartId chart = ChartId::planar) {
    const std::string n = f.name();
    return WeylSource(n, {WeylStructureChart::conformal(std::move(f), std::move(beta), chart)});
  }

  static WeylSource from_conic(const ConicStructure& q) {
    return WeylSource(q.name(), {q.weyl(ChartId::north), q.weyl(ChartId::south), q.weyl(ChartId::gnomonic)});
  }

  const std::string& name() const { return name_; }

  bool has_chart(ChartId id) const {
    return std::any_of(charts_.begin(), charts_.end(), [id](const auto& c) { return c.chart == id; });
  }

  const WeylStructureChart& chart(ChartId id) const {
    for (const auto& c : charts_)
      if (c.chart == id) return c;
    throw Error(ErrorCode::left_all_charts, "no chart of " + name_ + " is " + std::string(to_string(id)));
  }

 private:
  std::string name_;
  std::vector<WeylStructureChart> charts_;
};

/// Pointwise frame data, carried as jets of order N.
template <int N>
struct FrameGeometry {
  Mat2<Jet<N>> E;         // theta^a = E[a][i] dx^i, g = E^T E
  Vec2<Jet<N>> rho;       // d theta^1 = rho ^ theta^2, d theta^2 = -rho ^ theta^1
  Vec2<Jet<N>> beta;
  Vec2<Jet<N>> star_beta;
  Jet<N> area;            // det E
  Jet<N> R;               // Gauss curvature
  Jet<N> delta_beta;      // codifferential
};

namespace detail {

template <int N>
Vec2<Jet<N>> truncate2(const Vec2<Jet<N + 1>>& v) {
  return {v[0].template truncate<N>(), v[1].template truncate<N>()};
}

// (*b)_i = eps_ij sqrt(det g) g^{jk} b_k with eps_12 = -1, so *dx = dy for conformal g.
template <int N>
Vec2<Jet<N>> hodge_star(const Mat2<Jet<N>>& g, const Jet<N>& area, const Vec2<Jet<N>>& b) {
  const Mat2<Jet<N>> gi = inverse(g);
  const Vec2<Jet<N>> up = {gi[0][0] * b[0] + gi[0][1] * b[1], gi[1][0] * b[0] + gi[1][1] * b[1]};
  return {-area * up[1], area * up[0]};
}

template <int N>
Jet<N> curl(const Vec2<Jet<N + 1>>& w) {
  return w[1].derivative(0) - w[0].derivative(1);
}

}  // namespace detail

/// Frame geometry from g at order N + 2 and beta at order N + 1.
template <int N>
FrameGeometry<N> frame_geometry(const Mat2<Jet<N + 2>>& g, const Vec2<Jet<N + 1>>& beta) {
  const Mat2<Jet<N + 2>> L = cholesky(g);
  const Mat2<Jet<N + 2>> E = transpose(L);
  const Jet<N + 1> c1 = detail::curl<N + 1>(E[0]);
  const Jet<N + 1> c2 = detail::curl<N + 1>(E[1]);
  const Mat2<Jet<N + 1>> E1 = truncate<N + 1>(E);
  const Jet<N + 1> a1 = det(E1);
  const Vec2<Jet<N + 1>> rho = {(E1[0][0] * c1 + E1[1][0] * c2) / a1, (E1[0][1] * c1 + E1[1][1] * c2) / a1};
  const Vec2<Jet<N + 1>> star = detail::hodge_star<N + 1>(truncate<N + 1>(g), a1, beta);

  FrameGeometry<N> out;
  out.E = truncate<N>(E1);
  out.area = a1.template truncate<N>();
  out.rho = detail::truncate2<N>(rho);
  out.beta = detail::truncate2<N>(beta);
  out.star_beta = detail::truncate2<N>(star);
  out.R = -detail::curl<N>(rho) / out.area;
  out.delta_beta = detail::curl<N>(star) / out.area;
  return out;
}

template <int N>
FrameGeometry<N> frame_geometry(const WeylStructureChart& w, const Vec2<double>& p) {
  if (!Chart{w.chart, 0.0}.contains(p)) throw Error(ErrorCode::point_outside_domain, "point outside chart");
  return frame_geometry<N>(w.metric().template evaluate<N + 2>(p), w.beta.template evaluate<N + 1>(p));
}

/// R = -e^{-2f} (f_xx + f_yy) for g = e^{2f} delta.
inline double gauss_curvature(const ScalarJet& f) {
  if (f.order < 2) throw Error(ErrorCode::order_unsupported, "curvature needs a second-order jet");
  return -std::exp(-2.0 * f.value) * (f.hess[0][0] + f.hess[1][1]);
}

/// delta beta = e^{-2f} (d_x beta_1 + d_y beta_2), fixed by d(*beta) = (delta beta) mu.
inline double codifferential(const OneFormJet& beta, const ScalarJet& f) {
  if (beta.order < 1) throw Error(ErrorCode::order_unsupported, "codifferential needs a first-order jet");
  return std::exp(-2.0 * f.value) * (beta.db[0][0] + beta.db[1][1]);
}

inline double positivity_value(const WeylStructureChart& w, const Vec2<double>& p) {
  const auto geo = frame_geometry<0>(w, p);
  return geo.delta_beta.value() + geo.R.value();
}

struct PositivityReport {
  double min_value = std::numeric_limits<double>::infinity();
  Vec2<double> argmin{};
  bool positive = false;
};

inline PositivityReport positivity(const WeylStructureChart& w, const std::vector<Vec2<double>>& grid) {
  PositivityReport r;
  for (const auto& p : grid) {
    const double v = positivity_value(w, p);
    if (v < r.min_value) {
      r.min_value = v;
      r.argmin = p;
    }
  }
  r.positive = !grid.empty() && r.min_value > 0.0;
  return r;
}

inline PositivityReport positivity(const ScalarField& f, const OneFormField& beta, const std::vector<Vec2<double>>& grid) {
  return positivity(WeylStructureChart::conformal(f, beta), grid);
}

namespace detail {

inline Mat3<double> riemannian_rows(const FrameGeometry<0>& geo, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  Mat3<double> a{};
  for (int i = 0; i < 2; ++i) {
    a[0][i] = c * geo.E[0][i].value() + s * geo.E[1][i].value();
    a[1][i] = -s * geo.E[0][i].value() + c * geo.E[1][i].value();
    a[2][i] = geo.rho[i].value();
  }
  a[2][2] = 1.0;
  return a;
}

inline Mat3<double> finsler_rows(const FrameGeometry<0>& geo, double phi) {
  const double k = geo.delta_beta.value() + geo.R.value();
  if (!(k > 0.0)) throw Error(ErrorCode::positivity_violated, "delta beta + R is not positive");
  const double s = std::sqrt(k);
  const Mat3<double> a = riemannian_rows(geo, phi);
  Mat3<double> w{};
  for (int i = 0; i < 2; ++i) w[0][i] = geo.star_beta[i].value() - a[2][i];
  w[0][2] = -1.0;
  for (int i = 0; i < 3; ++i) {
    w[1][i] = s * a[1][i];
    w[2][i] = s * a[0][i];
  }
  return w;
}

}  // namespace detail

inline CoframeSample riemannian_coframe(const WeylStructureChart& w, const UTBPoint& u) {
  return {detail::riemannian_rows(frame_geometry<0>(w, u.x), u.phi)};
}

inline CoframeSample riemannian_coframe(const ScalarField& f, const UTBPoint& u) {
  return riemannian_coframe(WeylStructureChart::conformal(f, zero_oneform(), u.chart), u);
}

inline CoframeSample finsler_coframe(const WeylStructureChart& w, const UTBPoint& u) {
  return {detail::finsler_rows(frame_geometry<0>(w, u.x), u.phi)};
}

inline CoframeSample finsler_coframe(const ScalarField& f, const OneFormField& beta, const UTBPoint& u) {
  return finsler_coframe(WeylStructureChart::conformal(f, beta, u.chart), u);
}

/// Unit vector of the fibre coordinate phi, in chart components.
inline Vec2<double> fibre_vector(const FrameGeometry<0>& geo, double phi) {
  Mat2<double> E;
  for (int a = 0; a < 2; ++a)
    for (int i = 0; i < 2; ++i) E[a][i] = geo.E[a][i].value();
  return matvec(inverse(E), Vec2<double>{std::cos(phi), std::sin(phi)});
}

// ---------------------------------------------------------------------------
// Exterior derivatives by central differences on (x, y, phi).

/// 2-form components (dxdy, dxdphi, dydphi) per row.
using TwoForms = std::array<Vec3<double>, 3>;

namespace detail {

inline Vec3<double> wedge(const Vec3<double>& a, const Vec3<double>& b) {
  return {a[0] * b[1] - a[1] * b[0], a[0] * b[2] - a[2] * b[0], a[1] * b[2] - a[2] * b[1]};
}

// Component of a 2-form on the pair (u, v) of vectors.
inline double pair(const Vec3<double>& F, const Vec3<double>& u, const Vec3<double>& v) {
  return F[0] * (u[0] * v[1] - u[1] * v[0]) + F[1] * (u[0] * v[2] - u[2] * v[0]) + F[2] * (u[1] * v[2] - u[2] * v[1]);
}

struct Differentiated {
  Mat3<double> m{};
  TwoForms d{};
};

template <class Rows>
Differentiated differentiate(const WeylStructureChart& w, const UTBPoint& u, double h, Rows rows) {
  const Vec2<double>& x = u.x;
  const auto g0 = frame_geometry<0>(w, x);
  const auto gxp = frame_geometry<0>(w, {x[0] + h, x[1]});
  const auto gxm = frame_geometry<0>(w, {x[0] - h, x[1]});
  const auto gyp = frame_geometry<0>(w, {x[0], x[1] + h});
  const auto gym = frame_geometry<0>(w, {x[0], x[1] - h});
  Differentiated out;
  out.m = rows(g0, u.phi);
  const Mat3<double> mxp = rows(gxp, u.phi), mxm = rows(gxm, u.phi), myp = rows(gyp, u.phi), mym = rows(gym, u.phi);
  const Mat3<double> mpp = rows(g0, u.phi + h), mpm = rows(g0, u.phi - h);
  for (int r = 0; r < 3; ++r) {
    auto D = [&](const Mat3<double>& p, const Mat3<double>& m, int c) { return (p[r][c] - m[r][c]) / (2.0 * h); };
    out.d[r] = {D(mxp, mxm, 1) - D(myp, mym, 0), D(mxp, mxm, 2) - D(mpp, mpm, 0), D(myp, mym, 2) - D(mpp, mpm, 1)};
  }
  return out;
}

}  // namespace detail

/// Residuals of d alpha_1 + alpha_2 ^ alpha_3, d alpha_2 + alpha_3 ^ alpha_1,
/// d alpha_3 + R alpha_1 ^ alpha_2 (max-norm over components).
inline std::array<double, 3> riemannian_structure_residuals(const WeylStructureChart& w, const UTBPoint& u,
                                                            double h = kCoframeStep) {
  const auto d = detail::differentiate(w, u, h, detail::riemannian_rows);
  const double R = frame_geometry<0>(w, u.x).R.value();
  const auto& a = d.m;
  const std::array<Vec3<double>, 3> rhs = {detail::wedge(a[1], a[2]), detail::wedge(a[2], a[0]),
                                           scale(detail::wedge(a[0], a[1]), R)};
  std::array<double, 3> res{};
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k) res[r] = std::max(res[r], std::abs(d.d[r][k] + rhs[r][k]));
  return res;
}

/// Residual of d(*beta - alpha_3) - (delta beta + R) mu on the unit tangent bundle.
inline double positivity_identity_residual(const WeylStructureChart& w, const UTBPoint& u, double h = kCoframeStep) {
  auto rows = [](const FrameGeometry<0>& geo, double phi) {
    Mat3<double> m = detail::riemannian_rows(geo, phi);
    for (int i = 0; i < 2; ++i) m[2][i] = geo.star_beta[i].value() - m[2][i];
    m[2][2] = -1.0;
    return m;
  };
  const auto d = detail::differentiate(w, u, h, rows);
  const auto geo = frame_geometry<0>(w, u.x);
  const double mu = (geo.delta_beta.value() + geo.R.value()) * geo.area.value();
  return std::max({std::abs(d.d[2][0] - mu), std::abs(d.d[2][1]), std::abs(d.d[2][2])});
}

/// Invariants of the Finsler coframe from the structure equations
///   d w1 = -w2^w3,  d w2 = -w3^(w1 - I w2),  d w3 = -(K w1 - C w3)^w2.
inline CoframeInvariants coframe_invariants(const WeylStructureChart& w, const UTBPoint& u, double h = kCoframeStep) {
  const auto d = detail::differentiate(w, u, h, detail::finsler_rows);
  if (!(std::abs(det(d.m)) > 1e-10)) throw Error(ErrorCode::singular_coframe, "coframe is singular");
  const Mat3<double> inv = inverse(d.m);
  const std::array<Vec3<double>, 3> W = {column(inv, 0), column(inv, 1), column(inv, 2)};
  // F[r][j][k] = d w_r (W_j, W_k)
  auto F = [&](int r, int j, int k) { return detail::pair(d.d[r], W[j], W[k]); };
  CoframeInvariants out;
  out.I = -F(1, 1, 2);
  out.C = -F(2, 1, 2);
  const double K = -F(2, 0, 1);
  out.K_residual = std::abs(K - 1.0);
  out.eq_residuals[0] = std::max({std::abs(F(0, 0, 1)), std::abs(F(0, 0, 2)), std::abs(F(0, 1, 2) + 1.0)});
  out.eq_residuals[1] = std::max(std::abs(F(1, 0, 1)), std::abs(F(1, 0, 2) - 1.0));
  out.eq_residuals[2] = std::max(std::abs(F(2, 0, 2)), out.K_residual);
  return out;
}

inline CoframeInvariants coframe_invariants(const ScalarField& f, const OneFormField& beta, const UTBPoint& u,
                                            double h = kCoframeStep) {
  return coframe_invariants(WeylStructureChart::conformal(f, beta, u.chart), u, h);
}

/// Closed forms I = (ds(v) + s beta(v)) / s^2 and C = -(ds(Jv) + s beta(Jv)) / s^2
/// with s = sqrt(delta beta + R) and v, Jv the frame vectors of phi.
inline std::array<double, 2> invariants_closed_form(const WeylStructureChart& w, const UTBPoint& u) {
  const auto geo = frame_geometry<1>(w, u.x);
  const Jet<1> k = geo.delta_beta + geo.R;
  if (!(k.value() > 0.0)) throw Error(ErrorCode::positivity_violated, "delta beta + R is not positive");
  const Jet<1> s = sqrt(k);
  const auto geo0 = frame_geometry<0>(w, u.x);
  const Vec2<double> v = fibre_vector(geo0, u.phi), Jv = fibre_vector(geo0, u.phi + 0.5 * std::numbers::pi);
  const Vec2<double> ds = {s.partial(1, 0), s.partial(0, 1)}, b = {geo.beta[0].value(), geo.beta[1].value()};
  const double s0 = s.value();
  auto d2 = [](const Vec2<double>& a, const Vec2<double>& c) { return a[0] * c[0] + a[1] * c[1]; };
  return {(d2(ds, v) + s0 * d2(b, v)) / (s0 * s0), -(d2(ds, Jv) + s0 * d2(b, Jv)) / (s0 * s0)};
}

// ---------------------------------------------------------------------------
// Flow of W1, the vector field dual to omega_1.

struct UTBState {
  UTBPoint u;
  double s = 0.0;
};

struct FlowOptions {
  double step = 5e-3;
  double s_max = 20.0;
  double switch_radius = 1.5;
  double gnomonic_radius = 2.0;
};

struct FlowSample {
  double s = 0.0;
  UTBPoint u;
  Vec3<double> P{};  // embedded base point
  Vec3<double> T{};  // embedded unit fibre direction
};

struct FlowPeriod {
  double period = 0.0;
  double err = 0.0;
  std::vector<FlowSample> samples;
};

inline Vec3<double> w1_field(const WeylSource& src, const UTBPoint& u) {
  const auto geo = frame_geometry<0>(src.chart(u.chart), u.x);
  const Mat3<double> m = detail::finsler_rows(geo, u.phi);
  if (!(std::abs(det(m)) > 1e-10)) throw Error(ErrorCode::singular_coframe, "coframe is singular");
  return column(inverse(m), 0);
}

inline FlowSample flow_sample(const WeylSource& src, const UTBPoint& u, double s) {
  FlowSample f;
  f.s = s;
  f.u = u;
  f.P = embed(u.chart, u.x[0], u.x[1]);
  const Vec2<double> v = fibre_vector(frame_geometry<0>(src.chart(u.chart), u.x), u.phi);
  const auto t = embedding_tangents(u.chart, u.x);
  const Vec3<double> T = scale(t[0], v[0]) + scale(t[1], v[1]);
  f.T = scale(T, 1.0 / norm(T));
  return f;
}

namespace detail {

inline UTBPoint shifted(const UTBPoint& u, const Vec3<double>& k, double h) {
  return {u.chart, {u.x[0] + h * k[0], u.x[1] + h * k[1]}, u.phi + h * k[2]};
}

inline UTBPoint w1_rk4(const WeylSource& src, const UTBPoint& u, double h) {
  auto f = [&](const UTBPoint& q) {
    try {
      return w1_field(src, q);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::point_outside_domain)
        throw Error(ErrorCode::left_all_charts, "flow left the domain of " + src.name());
      throw;
    }
  };
  const Vec3<double> k1 = f(u);
  const Vec3<double> k2 = f(shifted(u, k1, 0.5 * h));
  const Vec3<double> k3 = f(shifted(u, k2, 0.5 * h));
  const Vec3<double> k4 = f(shifted(u, k3, h));
  return shifted(u, k1 + scale(k2, 2.0) + scale(k3, 2.0) + k4, h / 6.0);
}

inline UTBPoint change_chart(const WeylSource& src, const UTBPoint& u, ChartId to) {
  if (!src.has_chart(to)) throw Error(ErrorCode::left_all_charts, "no chart of " + src.name() + " contains the flow");
  const auto t = transition(Chart{u.chart, 0.0}, Chart{to, 0.0}, u.x);
  const Vec2<double> v = matvec(t.jacobian, fibre_vector(frame_geometry<0>(src.chart(u.chart), u.x), u.phi));
  const auto geo = frame_geometry<0>(src.chart(to), t.point);
  const double a = geo.E[0][0].value() * v[0] + geo.E[0][1].value() * v[1];
  const double b = geo.E[1][0].value() * v[0] + geo.E[1][1].value() * v[1];
  return {to, t.point, std::atan2(b, a)};
}

inline UTBPoint maybe_switch(const WeylSource& src, const UTBPoint& u, const FlowOptions& opt) {
  const double r = std::hypot(u.x[0], u.x[1]);
  if (!std::isfinite(r) || !std::isfinite(u.phi)) throw Error(ErrorCode::step_underflow, "flow state is not finite");
  switch (u.chart) {
    case ChartId::north:
    case ChartId::south:
      if (r > opt.switch_radius)
        return change_chart(src, u, u.chart == ChartId::north ? ChartId::south : ChartId::north);
      break;
    case ChartId::gnomonic:
      if (r > opt.gnomonic_radius) {
        const Vec3<double> P = embed(ChartId::gnomonic, u.x[0], u.x[1]);
        return change_chart(src, u, P[2] <= 0.0 ? ChartId::north : ChartId::south);
      }
      break;
    case ChartId::planar: break;
  }
  return u;
}

inline double flow_distance(const FlowSample& a, const FlowSample& b) {
  return std::sqrt(dot(a.P - b.P, a.P - b.P) + dot(a.T - b.T, a.T - b.T));
}

}  // namespace detail

/// Integrates the W1 flow from start and reports its first return to the
/// start point of the unit tangent bundle.
inline FlowPeriod w1_flow_period(const WeylSource& src, const UTBPoint& start, double tol = 1e-6,
                                 const FlowOptions& opt = {}) {
  if (!(opt.step > 1e-12)) throw Error(ErrorCode::step_underflow, "step size must exceed 1e-12");
  if (!src.has_chart(start.chart)) throw Error(ErrorCode::left_all_charts, "start chart not covered by " + src.name());
  FlowPeriod out;
  const FlowSample s0 = flow_sample(src, start, 0.0);
  out.samples.push_back(s0);
  UTBPoint u = start;
  bool left = false;
  double prev2 = 0.0, prev1 = 0.0;
  UTBPoint last = start;  // state at s_{k-2}
  const long n = std::lround(std::ceil(opt.s_max / opt.step));
  for (long k = 1; k <= n; ++k) {
    const UTBPoint next = detail::maybe_switch(src, detail::w1_rk4(src, u, opt.step), opt);
    const double s = k * opt.step;
    const FlowSample fs = flow_sample(src, next, s);
    out.samples.push_back(fs);
    const double D = detail::flow_distance(fs, s0);
    if (!left && D > 0.5) left = true;
    if (left && k >= 3 && prev1 <= prev2 && prev1 <= D && prev1 < 0.1) {
      // Golden-section search on [s_{k-2}, s_k], stepping from the state at s_{k-2}.
      const double gr = (std::sqrt(5.0) - 1) / 2;
      const double s_base = (k - 2) * opt.step;
      auto g = [&](double t) {
        return t <= 0.0 ? prev2 : detail::flow_distance(flow_sample(src, detail::w1_rk4(src, last, t), 0.0), s0);
      };
      double a = 0.0, b = 2.0 * opt.step;
      double c = b - gr * (b - a), d = a + gr * (b - a), gc = g(c), gd = g(d);
      for (int it = 0; it < 80; ++it) {
        if (gc < gd) {
          b = d;
          d = c;
          gd = gc;
          c = b - gr * (b - a);
          gc = g(c);
        } else {
          a = c;
          c = d;
          gc = gd;
          d = a + gr * (b - a);
          gd = g(d);
        }
      }
      const double t = 0.5 * (a + b);
      const double err = g(t);
      if (err <= tol) {
        out.period = s_base + t;
        out.err = err;
        return out;
      }
    }
    prev2 = prev1;
    prev1 = D;
    last = u;
    u = next;
  }
  throw Error(ErrorCode::no_return, "W1 flow did not return within s = " + std::to_string(opt.s_max));
}

}  // namespace projweyl

#endif  // PROJWEYL_FINSLER_HPP
