#ifndef PROJWEYL_FLAT_MODEL_HPP
#define PROJWEYL_FLAT_MODEL_HPP

// The flat projective structure on S^2 (great circles) and the
// correspondence between smooth complex conics without real points and the
// Weyl structures compatible with it.
//
// A point [z] of CP^2 off RP^2, z = p + i q, lies over u = rho(z) = p x q / |p x q|
// and encodes the conformal class on T_u S^2 = u^perp in which u x p, u x q
// are orthonormal.  A conic C meets the line {u . z = 0} in two points, one
// over u and one over -u; the first gives the conformal class at u.  The
// compatible beta is then the least-squares solution against the round
// Levi-Civita connection, whose Pi is the flat structure's.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "projweyl/charts.hpp"
#include "projweyl/compatibility.hpp"
#include "projweyl/connection.hpp"
#include "projweyl/error.hpp"
#include "projweyl/fields.hpp"
#include "projweyl/jet.hpp"
#include "projweyl/linalg.hpp"

namespace projweyl {

using cplx = std::complex<double>;

inline constexpr double kDegenerateConicTolerance = 1e-9;
inline constexpr double kRealPointTolerance = 1e-12;

/// Q = A + i B, complex symmetric, stored at unit Frobenius norm.
class Conic {
 public:
  Conic() : Conic(identity3(), Mat3<double>{}) {}

  Conic(const Mat3<double>& A, const Mat3<double>& B) {
    double asym = 0.0, fro = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        asym = std::max({asym, std::abs(A[i][j] - A[j][i]), std::abs(B[i][j] - B[j][i])});
        fro += A[i][j] * A[i][j] + B[i][j] * B[i][j];
      }
    fro = std::sqrt(fro);
    if (!(fro > 0.0) || !std::isfinite(fro)) throw Error(ErrorCode::malformed_config, "conic matrix is zero or not finite");
    if (asym > 1e-12 * fro) throw Error(ErrorCode::malformed_config, "conic matrix is not symmetric");
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        a_[i][j] = 0.5 * (A[i][j] + A[j][i]) / fro;
        b_[i][j] = 0.5 * (B[i][j] + B[j][i]) / fro;
      }
  }

  /// Upper triangles (00, 01, 02, 11, 12, 22) of A, then of B.
  static Conic from_upper(const std::array<double, 12>& v) {
    Mat3<double> A{}, B{};
    int k = 0;
    for (auto* M : {&A, &B})
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
          (*M)[i][j] = (*M)[j][i] = v[k];
          ++k;
        }
    return Conic(A, B);
  }

  const Mat3<double>& A() const { return a_; }
  const Mat3<double>& B() const { return b_; }
  cplx Q(int i, int j) const { return {a_[i][j], b_[i][j]}; }

  std::array<double, 12> upper() const {
    std::array<double, 12> v{};
    int k = 0;
    for (const auto* M : {&a_, &b_})
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) v[k++] = (*M)[i][j];
    return v;
  }

  cplx determinant() const {
    auto q = [this](int i, int j) { return Q(i, j); };
    return q(0, 0) * (q(1, 1) * q(2, 2) - q(1, 2) * q(2, 1)) - q(0, 1) * (q(1, 0) * q(2, 2) - q(1, 2) * q(2, 0)) +
           q(0, 2) * (q(1, 0) * q(2, 1) - q(1, 1) * q(2, 0));
  }

  bool degenerate() const { return std::abs(determinant()) <= kDegenerateConicTolerance; }

  /// z^T Q w for complex (or complex-jet) vectors.
  template <class C>
  C bilinear(const Vec3<C>& z, const Vec3<C>& w) const {
    C acc = 0.0 * z[0];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (a_[i][j] != 0.0 || b_[i][j] != 0.0) acc = acc + Q(i, j) * (z[i] * w[j]);
    return acc;
  }

  static Mat3<double> identity3() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

 private:
  Mat3<double> a_{}, b_{};
};

struct ProjPoint {
  Vec3<cplx> z{};

  /// |z| = 1 and the first nonzero component real positive.
  ProjPoint normalized() const {
    double n = 0.0;
    for (const auto& c : z) n += std::norm(c);
    n = std::sqrt(n);
    if (!(n > 0.0)) throw Error(ErrorCode::malformed_config, "zero vector is not a projective point");
    ProjPoint r;
    cplx phase = 1.0;
    for (const auto& c : z)
      if (std::abs(c) > 1e-12 * n) {
        phase = std::conj(c) / std::abs(c);
        break;
      }
    for (int i = 0; i < 3; ++i) r.z[i] = z[i] * phase / n;
    return r;
  }

  Vec3<double> re() const { return {z[0].real(), z[1].real(), z[2].real()}; }
  Vec3<double> im() const { return {z[0].imag(), z[1].imag(), z[2].imag()}; }
};

/// Distance between projective points (0 iff equal).
inline double projective_distance(const ProjPoint& a, const ProjPoint& b) {
  const auto x = a.normalized(), y = b.normalized();
  double d = 0.0;
  for (int i = 0; i < 3; ++i) d = std::max(d, std::abs(x.z[i] - y.z[i]));
  return d;
}

// ---------------------------------------------------------------------------
// Real points.

struct RealPointReport {
  bool real_points = false;
  double min_F = 0.0;     // min over the unit sphere of (x^T A x)^2 + (x^T B x)^2
  Vec3<double> argmin{};
};

namespace detail {

inline double quad_form(const Mat3<double>& M, const Vec3<double>& x) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += M[i][j] * x[i] * x[j];
  return s;
}

inline Vec3<double> mat_vec(const Mat3<double>& M, const Vec3<double>& x) {
  return {M[0][0] * x[0] + M[0][1] * x[1] + M[0][2] * x[2], M[1][0] * x[0] + M[1][1] * x[1] + M[1][2] * x[2],
          M[2][0] * x[0] + M[2][1] * x[1] + M[2][2] * x[2]};
}

/// Unit vectors a1, a2 spanning u^perp with a1 x a2 = u/|u|.
template <class T>
std::array<Vec3<T>, 2> perp_basis(const Vec3<T>& u) {
  Vec3<T> a1;
  if (std::abs(value_of(u[2])) < 0.9 * std::abs(value_of(norm(u))))
    a1 = {-u[1], u[0], 0.0 * u[0]};  // e_z x u
  else
    a1 = {0.0 * u[0], -u[2], u[1]};  // e_x x u
  a1 = normalized(a1);
  const Vec3<T> un = normalized(u);
  return {a1, cross(un, a1)};
}

// Levenberg-Marquardt on the sphere for the residual pair (x^T A x, x^T B x).
inline std::pair<double, Vec3<double>> minimize_F(const Mat3<double>& A, const Mat3<double>& B, Vec3<double> x) {
  auto F = [&](const Vec3<double>& y) {
    const double a = quad_form(A, y), b = quad_form(B, y);
    return a * a + b * b;
  };
  double f = F(x), lambda = 1e-3;
  for (int it = 0; it < 200 && f > 1e-32; ++it) {
    const auto [t1, t2] = perp_basis(x);
    const Vec3<double> Ax = mat_vec(A, x), Bx = mat_vec(B, x);
    const double r[2] = {quad_form(A, x), quad_form(B, x)};
    const double J[2][2] = {{2 * dot(Ax, t1), 2 * dot(Ax, t2)}, {2 * dot(Bx, t1), 2 * dot(Bx, t2)}};
    const double g0 = J[0][0] * r[0] + J[1][0] * r[1], g1 = J[0][1] * r[0] + J[1][1] * r[1];
    const double h00 = J[0][0] * J[0][0] + J[1][0] * J[1][0], h01 = J[0][0] * J[0][1] + J[1][0] * J[1][1],
                 h11 = J[0][1] * J[0][1] + J[1][1] * J[1][1];
    bool accepted = false;
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      const double a00 = h00 * (1 + lambda) + 1e-300, a11 = h11 * (1 + lambda) + 1e-300;
      const double d = a00 * a11 - h01 * h01;
      const double s0 = -(a11 * g0 - h01 * g1) / d, s1 = -(-h01 * g0 + a00 * g1) / d;
      const Vec3<double> y = normalized(x + scale(t1, s0) + scale(t2, s1));
      const double fy = F(y);
      if (fy < f) {
        const double step = std::hypot(s0, s1);
        x = y;
        f = fy;
        lambda = std::max(lambda / 5.0, 1e-12);
        accepted = true;
        if (step < 1e-15) return {f, x};
      } else {
        lambda *= 8.0;
      }
    }
    if (!accepted) break;
  }
  return {f, x};
}

}  // namespace detail

/// Multi-start search over a 20 x 40 spherical grid; real iff min F < 1e-12.
inline RealPointReport has_real_points(const Conic& q) {
  if (q.degenerate()) throw Error(ErrorCode::degenerate_conic, "conic is singular");
  RealPointReport best;
  best.min_F = std::numeric_limits<double>::infinity();
  constexpr int kTheta = 20, kPhi = 40;
  for (int i = 0; i < kTheta; ++i) {
    const double th = std::numbers::pi * (i + 0.5) / kTheta;
    for (int j = 0; j < kPhi; ++j) {
      const double ph = 2.0 * std::numbers::pi * j / kPhi;
      const Vec3<double> x0 = {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
      const auto [f, x] = detail::minimize_F(q.A(), q.B(), x0);
      if (f < best.min_F) {
        best.min_F = f;
        best.argmin = x;
      }
    }
  }
  best.real_points = best.min_F < kRealPointTolerance;
  return best;
}

inline void require_admissible(const Conic& q) {
  if (has_real_points(q).real_points) throw Error(ErrorCode::inadmissible_conic, "conic has real points");
}

// ---------------------------------------------------------------------------
// rho, tau, fiber section, decoding.

inline Vec3<double> rho(const ProjPoint& z) {
  const auto n = z.normalized();
  const Vec3<double> c = cross(n.re(), n.im());
  if (norm(c) < 1e-12) throw Error(ErrorCode::real_point_input, "point lies in RP^2");
  return normalized(c);
}

/// z = g0 x g1 + i g0 x g2 for the columns g_i of a unimodular g.
inline ProjPoint tau(const Mat3<double>& g) {
  if (std::abs(det(g) - 1.0) > 1e-10) throw Error(ErrorCode::non_unimodular, "det g must be 1");
  const Vec3<double> g0 = column(g, 0), g1 = column(g, 1), g2 = column(g, 2);
  const Vec3<double> p = cross(g0, g1), q = cross(g0, g2);
  ProjPoint z;
  for (int i = 0; i < 3; ++i) z.z[i] = {p[i], q[i]};
  return z;
}

/// The point of C on {u . z = 0} lying over u (not over -u); generic in the
/// real scalar T so that derivatives in u propagate.
template <class T>
Vec3<typename complex_of<T>::type> fiber_section_t(const Conic& q, const Vec3<T>& u) {
  using C = typename complex_of<T>::type;
  const auto [a1, a2] = detail::perp_basis(u);
  const Vec3<C> a = {complexify(a1[0]), complexify(a1[1]), complexify(a1[2])};
  const Vec3<C> b = {complexify(a2[0]), complexify(a2[1]), complexify(a2[2])};
  const C qaa = q.bilinear(a, a), qab = q.bilinear(a, b), qbb = q.bilinear(b, b);
  const double scale_q = std::abs(value_of(qaa)) + std::abs(value_of(qab)) + std::abs(value_of(qbb));
  const C disc = qab * qab - qaa * qbb;
  if (std::abs(value_of(disc)) <= 1e-14 * scale_q * scale_q)
    throw Error(ErrorCode::inconsistent_conic, "double root on a fiber line");
  const C sq = sqrt(disc);
  // Stable roots: w = -qab -+ sq with the larger modulus.
  const C wp = -qab - sq, wm = -qab + sq;
  const C w = std::abs(value_of(wp)) >= std::abs(value_of(wm)) ? wp : wm;
  std::array<Vec3<C>, 2> cand;
  if (std::abs(value_of(qaa)) >= std::abs(value_of(qbb))) {
    // z = s a + b, qaa s^2 + 2 qab s + qbb = 0, roots w/qaa and qbb/w.
    const C s1 = w / qaa, s2 = qbb / w;
    for (int i = 0; i < 3; ++i) {
      cand[0][i] = s1 * a[i] + b[i];
      cand[1][i] = s2 * a[i] + b[i];
    }
  } else {
    const C t1 = w / qbb, t2 = qaa / w;
    for (int i = 0; i < 3; ++i) {
      cand[0][i] = a[i] + t1 * b[i];
      cand[1][i] = a[i] + t2 * b[i];
    }
  }
  Vec3<double> uv;
  for (int i = 0; i < 3; ++i) uv[i] = value_of(u[i]);
  double side[2];
  for (int k = 0; k < 2; ++k) {
    Vec3<double> p, im;
    for (int i = 0; i < 3; ++i) {
      p[i] = value_of(cand[k][i]).real();
      im[i] = value_of(cand[k][i]).imag();
    }
    const Vec3<double> c = cross(p, im);
    side[k] = dot(c, uv) / (norm(c) * norm(uv));
  }
  if (side[0] > 0.0 && side[1] < 0.0) return cand[0];
  if (side[1] > 0.0 && side[0] < 0.0) return cand[1];
  throw Error(ErrorCode::residual_failure, "fiber roots do not separate the hemispheres");
}

inline ProjPoint fiber_section(const Conic& q, const Vec3<double>& u) {
  if (!(norm(u) > 0.0)) throw Error(ErrorCode::malformed_config, "u must be nonzero");
  return ProjPoint{fiber_section_t(q, normalized(u))}.normalized();
}

struct DecodedConformal {
  Vec3<double> u{};
  std::array<Vec3<double>, 2> basis{};  // orthonormal basis a1, a2 of u^perp
  Mat2<double> G{};                     // det-1 inner product in that basis
};

namespace detail {

// Inner product on span(e1, e2) declaring e1, e2 orthonormal, evaluated on
// the vectors t_i; t_i, e_j all perpendicular to u.
template <class T>
Mat2<T> decode_gram(const Vec3<T>& u, const Vec3<T>& e1, const Vec3<T>& e2, const std::array<Vec3<T>, 2>& t) {
  const T D = dot(cross(e1, e2), u);
  Vec2<T> al, be;
  for (int i = 0; i < 2; ++i) {
    al[i] = dot(cross(t[i], e2), u) / D;
    be[i] = dot(cross(e1, t[i]), u) / D;
  }
  Mat2<T> G;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) G[i][j] = al[i] * al[j] + be[i] * be[j];
  return G;
}

}  // namespace detail

inline DecodedConformal decode_conformal(const ProjPoint& z) {
  DecodedConformal d;
  d.u = rho(z);
  const auto n = z.normalized();
  d.basis = detail::perp_basis(d.u);
  d.G = det_normalized(detail::decode_gram(d.u, cross(d.u, n.re()), cross(d.u, n.im()), d.basis));
  return d;
}

// ---------------------------------------------------------------------------
// The compatible Weyl structure in a sphere chart.

namespace detail {

template <int K>
Vec3<Jet<K>> truncate3(const Vec3<Jet<K + 1>>& v) {
  return {v[0].template truncate<K>(), v[1].template truncate<K>(), v[2].template truncate<K>()};
}

inline void require_sphere_chart(ChartId id) {
  if (!on_sphere(id)) throw Error(ErrorCode::point_outside_domain, "conic structures live on sphere charts");
}

}  // namespace detail

/// det-1 representative of the conic's conformal class in chart coordinates, to order K.
template <int K>
Mat2<Jet<K>> conic_metric_jet(const Conic& q, ChartId id, const Vec2<double>& p) {
  detail::require_sphere_chart(id);
  const auto v = chart_variables<K + 1>(p);
  const Vec3<Jet<K + 1>> P = embed(id, v[0], v[1]);
  const Vec3<Jet<K + 1>> u = normalized(P);
  const auto z = fiber_section_t(q, u);
  Vec3<Jet<K + 1>> re, im;
  for (int i = 0; i < 3; ++i) {
    re[i] = real(z[i]);
    im[i] = imag(z[i]);
  }
  const Vec3<Jet<K>> ut = detail::truncate3<K>(u);
  const Vec3<Jet<K>> e1 = detail::truncate3<K>(cross(u, re));
  const Vec3<Jet<K>> e2 = detail::truncate3<K>(cross(u, im));
  std::array<Vec3<Jet<K>>, 2> T;
  for (int k = 0; k < 3; ++k) {
    T[0][k] = P[k].derivative(0);
    T[1][k] = P[k].derivative(1);
  }
  return det_normalized(detail::decode_gram(ut, e1, e2, T));
}

/// Pi of the flat structure in a sphere chart (zero in the gnomonic chart).
template <int K>
Christoffel<Jet<K>> flat_structure_pi(ChartId id, const Vec2<double>& p) {
  if (id == ChartId::gnomonic) {
    Christoffel<Jet<K>> z;
    for (auto& a : z)
      for (auto& b : a)
        for (auto& c : b) c = Jet<K>(0.0);
    return z;
  }
  return projective_pi_t(levi_civita_jet<K>(round_metric<K + 1>(id, p)));
}

template <int K>
struct ConicWeylJet {
  Mat2<Jet<K + 1>> metric;  // det 1
  Vec2<Jet<K>> beta;
  double residual = 0.0;    // least-squares Pi mismatch at the point
};

template <int K>
ConicWeylJet<K> conic_weyl_jet(const Conic& q, ChartId id, const Vec2<double>& p) {
  ConicWeylJet<K> out;
  out.metric = conic_metric_jet<K + 1>(q, id, p);
  const auto sys = least_squares_system(truncate<K>(out.metric), metric_gradient<K>(out.metric), flat_structure_pi<K>(id, p));
  out.beta = solve_least_squares_t(sys);
  out.residual = least_squares_residual(sys, out.beta);
  return out;
}

struct ConicWeylPoint {
  Mat2<double> metric{};
  Vec2<double> beta{};
  double residual = 0.0;
};

/// Pointwise evaluation of an already validated conic.
inline ConicWeylPoint conic_weyl_point(const Conic& q, const Chart& chart, const Vec2<double>& p,
                                       double tol = kCompatibilityTolerance) {
  detail::require_sphere_chart(chart.id);
  if (!chart.contains(p)) throw Error(ErrorCode::point_outside_domain, "point outside chart");
  const auto j = conic_weyl_jet<0>(q, chart.id, p);
  ConicWeylPoint r;
  for (int i = 0; i < 2; ++i) {
    r.beta[i] = j.beta[i].value();
    for (int k = 0; k < 2; ++k) r.metric[i][k] = j.metric[i][k].value();
  }
  r.residual = j.residual;
  if (!(r.residual < tol)) throw Error(ErrorCode::residual_failure, "compatible beta not found to tolerance");
  return r;
}

inline ConicWeylPoint conic_weyl_structure(const Conic& q, const Chart& chart, const Vec2<double>& p) {
  require_admissible(q);
  return conic_weyl_point(q, chart, p);
}

/// A validated admissible conic with its Weyl structure as fields.
class ConicStructure {
 public:
  explicit ConicStructure(Conic q, std::string name = "conic") : q_(q), name_(std::move(name)) {
    report_ = has_real_points(q_);
    if (report_.real_points) throw Error(ErrorCode::inadmissible_conic, "conic has real points");
  }

  const Conic& conic() const { return q_; }
  const std::string& name() const { return name_; }
  const RealPointReport& real_point_report() const { return report_; }

  ConicWeylPoint at(const Chart& chart, const Vec2<double>& p) const { return conic_weyl_point(q_, chart, p); }

  MetricField metric(ChartId id) const {
    detail::require_sphere_chart(id);
    const Conic q = q_;
    return MetricField(
        name_ + ".metric",
        [q, id](auto order, const Vec2<double>& p) { return conic_metric_jet<decltype(order)::value>(q, id, p); },
        [id](const Vec2<double>& p) { return Chart{id, 0.0}.contains(p); });
  }

  OneFormField beta(ChartId id) const {
    detail::require_sphere_chart(id);
    const Conic q = q_;
    return OneFormField(
        name_ + ".beta",
        [q, id](auto order, const Vec2<double>& p) {
          constexpr int K = decltype(order)::value;
          if constexpr (K < kMaxFieldOrder) {
            return conic_weyl_jet<K>(q, id, p).beta;
          } else {
            throw Error(ErrorCode::order_unsupported, "conic beta beyond maximum order");
            return Vec2<Jet<K>>{};
          }
        },
        [id](const Vec2<double>& p) { return Chart{id, 0.0}.contains(p); });
  }

  WeylStructureChart weyl(ChartId id) const { return WeylStructureChart::general(metric(id), beta(id), id); }

  /// Weyl connection in every sphere chart.
  ConnectionField connection() const {
    const Conic q = q_;
    return ConnectionField(
        name_ + ".weyl",
        [q](ChartId id, const Vec2<double>& p) {
          if (!Chart{id, 0.0}.contains(p)) throw Error(ErrorCode::point_outside_domain, "point outside chart");
          const auto j = conic_weyl_jet<0>(q, id, p);
          return to_connection<0>(weyl_t(truncate<0>(j.metric), metric_gradient<0>(j.metric), j.beta));
        },
        {ChartId::north, ChartId::south, ChartId::gnomonic});
  }

 private:
  Conic q_;
  std::string name_;
  RealPointReport report_;
};

}  // namespace projweyl

#endif  // PROJWEYL_FLAT_MODEL_HPP
