#ifndef PROJWEYL_CONNECTION_HPP
#define PROJWEYL_CONNECTION_HPP

// Christoffel symbols of torsion-free connections on a surface: Levi-Civita
// and Weyl connections, projective invariants Pi^i_kl with the kappa chart
// functions, and projective equivalence with recovery of the 1-form eps in
//
//     c2^i_kl - c1^i_kl = eps_k delta^i_l + eps_l delta^i_k.
//
// Index convention: gamma[i][k][l] = Gamma^i_{kl}, indices 0-based.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "projweyl/error.hpp"
#include "projweyl/fields.hpp"
#include "projweyl/jet.hpp"
#include "projweyl/linalg.hpp"

namespace projweyl {

template <class T>
using Christoffel = std::array<std::array<std::array<T, 2>, 2>, 2>;

struct ConnectionCoeffs {
  Christoffel<double> gamma{};
  /// First partials, dgamma[m][i][k][l] = d_m Gamma^i_kl, when known.
  std::optional<std::array<Christoffel<double>, 2>> dgamma;

  ConnectionCoeffs() = default;
  /// Lower indices are symmetrised on construction (torsion-free).
  explicit ConnectionCoeffs(const Christoffel<double>& g) : gamma(symmetrized(g)) {}

  static Christoffel<double> symmetrized(const Christoffel<double>& g) {
    Christoffel<double> s = g;
    for (int i = 0; i < 2; ++i) {
      const double off = 0.5 * (g[i][0][1] + g[i][1][0]);
      s[i][0][1] = s[i][1][0] = off;
    }
    return s;
  }

  double operator()(int i, int k, int l) const { return gamma[i][k][l]; }
};

struct ProjectiveData {
  Christoffel<double> pi{};
  std::array<double, 4> kappa{};  // (kappa0, kappa1, kappa2, kappa3)
};

struct EpsilonForm {
  Vec2<double> e{};
};

// ---------------------------------------------------------------------------
// Generic formulas (T = double or Jet).

template <class T>
Christoffel<T> levi_civita_t(const Mat2<T>& g, const std::array<Mat2<T>, 2>& dg) {
  const Mat2<T> gi = inverse(g);
  Christoffel<T> c;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) {
        T acc = 0.0 * g[0][0];
        for (int m = 0; m < 2; ++m) acc += gi[i][m] * (dg[l][m][k] + dg[k][m][l] - dg[m][k][l]);
        c[i][k][l] = 0.5 * acc;
      }
  return c;
}

/// Gamma_W = Gamma_LC + g_kl b^i - beta_k delta^i_l - beta_l delta^i_k, b = g^{-1} beta.
template <class T>
Christoffel<T> weyl_t(const Mat2<T>& g, const std::array<Mat2<T>, 2>& dg, const Vec2<T>& beta) {
  Christoffel<T> c = levi_civita_t(g, dg);
  const Vec2<T> b = matvec(inverse(g), beta);
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) {
        c[i][k][l] += g[k][l] * b[i];
        if (i == l) c[i][k][l] -= beta[k];
        if (i == k) c[i][k][l] -= beta[l];
      }
  return c;
}

template <class T>
Christoffel<T> projective_pi_t(const Christoffel<T>& c) {
  const Vec2<T> tr = {c[0][0][0] + c[1][1][0], c[0][0][1] + c[1][1][1]};  // sum_j Gamma^j_{jl}
  Christoffel<T> p = c;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) {
        if (i == k) p[i][k][l] -= tr[l] / 3.0;
        if (i == l) p[i][k][l] -= tr[k] / 3.0;
      }
  return p;
}

template <class T>
std::array<T, 4> kappa_t(const Christoffel<T>& c) {
  return {c[1][0][0], (-c[0][0][0] + 2.0 * c[1][0][1]) / 3.0, (-2.0 * c[0][0][1] + c[1][1][1]) / 3.0, -c[0][1][1]};
}

template <class T>
Christoffel<T> epsilon_modify_t(const Christoffel<T>& c, const Vec2<T>& eps) {
  Christoffel<T> r = c;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) {
        if (i == l) r[i][k][l] += eps[k];
        if (i == k) r[i][k][l] += eps[l];
      }
  return r;
}

/// Metric derivative jets from a metric carried one order higher.
template <int K>
std::array<Mat2<Jet<K>>, 2> metric_gradient(const Mat2<Jet<K + 1>>& g) {
  std::array<Mat2<Jet<K>>, 2> dg;
  for (int m = 0; m < 2; ++m)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) dg[m][i][j] = g[i][j].derivative(m);
  return dg;
}

template <int K>
Mat2<Jet<K>> truncate(const Mat2<Jet<K + 1>>& g) {
  Mat2<Jet<K>> r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = g[i][j].template truncate<K>();
  return r;
}

template <int K>
Christoffel<Jet<K>> levi_civita_jet(const Mat2<Jet<K + 1>>& g) {
  return levi_civita_t(truncate<K>(g), metric_gradient<K>(g));
}

template <int K>
Christoffel<Jet<K>> weyl_jet(const Mat2<Jet<K + 1>>& g, const Vec2<Jet<K>>& beta) {
  return weyl_t(truncate<K>(g), metric_gradient<K>(g), beta);
}

template <int K>
ConnectionCoeffs to_connection(const Christoffel<Jet<K>>& c) {
  Christoffel<double> v;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) v[i][k][l] = c[i][k][l].value();
  ConnectionCoeffs out(v);
  if constexpr (K >= 1) {
    std::array<Christoffel<double>, 2> d;
    for (int m = 0; m < 2; ++m)
      for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) d[m][i][k][l] = c[i][k][l].partial(m == 0 ? 1 : 0, m == 1 ? 1 : 0);
    out.dgamma = d;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pointwise API.

inline void require_positive_definite(const Mat2<double>& g) {
  if (!(g[0][0] > 0.0 && det(g) > 0.0) || !std::isfinite(det(g)))
    throw Error(ErrorCode::singular_metric, "metric is not positive definite");
}

namespace detail {

inline std::array<Mat2<Jet<1>>, 2> metric_gradient_jet1(const MetricJet& m) {
  std::array<Mat2<Jet<1>>, 2> dg;
  for (int a = 0; a < 2; ++a)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) dg[a][i][j] = jet1(m.dg[a][i][j], m.d2g[0][a][i][j], m.d2g[1][a][i][j]);
  return dg;
}

}  // namespace detail

/// Levi-Civita Christoffels; first partials are filled when m carries second
/// derivatives.
inline ConnectionCoeffs levi_civita(const MetricJet& m) {
  require_positive_definite(m.g);
  if (m.order >= 2) return to_connection<1>(levi_civita_t(metric_as_jet1(m), detail::metric_gradient_jet1(m)));
  return ConnectionCoeffs(levi_civita_t(m.g, m.dg));
}

inline ConnectionCoeffs weyl_connection(const MetricJet& m, const OneFormJet& beta) {
  require_positive_definite(m.g);
  if (m.order >= 2 && beta.order >= 1)
    return to_connection<1>(weyl_t(metric_as_jet1(m), detail::metric_gradient_jet1(m), oneform_as_jet1(beta)));
  return ConnectionCoeffs(weyl_t(m.g, m.dg, beta.b));
}

inline ProjectiveData projective_invariants(const ConnectionCoeffs& c) {
  ProjectiveData d;
  d.pi = projective_pi_t(c.gamma);
  d.kappa = kappa_t(c.gamma);
  return d;
}

inline ConnectionCoeffs epsilon_modify(const ConnectionCoeffs& c, const EpsilonForm& eps) {
  return ConnectionCoeffs(epsilon_modify_t(c.gamma, eps.e));
}

/// eps with c2 = c1 + eps-modification, from the trace of the difference.
inline EpsilonForm recover_epsilon(const ConnectionCoeffs& c1, const ConnectionCoeffs& c2) {
  EpsilonForm e;
  for (int l = 0; l < 2; ++l) {
    double t = 0.0;
    for (int j = 0; j < 2; ++j) t += c2.gamma[j][j][l] - c1.gamma[j][j][l];
    e.e[l] = t / 3.0;
  }
  return e;
}

inline double max_abs_difference(const Christoffel<double>& a, const Christoffel<double>& b) {
  double m = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) m = std::max(m, std::abs(a[i][k][l] - b[i][k][l]));
  return m;
}

/// Euclidean norm over all eight entries.
inline double frobenius(const Christoffel<double>& a) {
  double s = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) s += a[i][k][l] * a[i][k][l];
  return std::sqrt(s);
}

inline constexpr double kDefaultPiTolerance = 1e-9;

struct EquivalenceResult {
  bool equivalent = false;
  EpsilonForm epsilon;
  double pi_difference = 0.0;          // max |Pi(c1) - Pi(c2)|
  double reconstruction_error = 0.0;   // max |c1 + eps-mod - c2|
};

inline EquivalenceResult projectively_equivalent(const ConnectionCoeffs& c1, const ConnectionCoeffs& c2,
                                                 double tol = kDefaultPiTolerance) {
  EquivalenceResult r;
  r.pi_difference = max_abs_difference(projective_pi_t(c1.gamma), projective_pi_t(c2.gamma));
  r.equivalent = r.pi_difference <= tol;
  r.epsilon = recover_epsilon(c1, c2);
  r.reconstruction_error = max_abs_difference(epsilon_modify(c1, r.epsilon).gamma, c2.gamma);
  return r;
}

// ---------------------------------------------------------------------------
// Connection fields.

/// Christoffel symbols as a function of the point, on one or more charts of
/// the fixed atlas.
class ConnectionField {
 public:
  using Eval = std::function<ConnectionCoeffs(ChartId, const Vec2<double>&)>;

  ConnectionField(std::string name, Eval eval, std::vector<ChartId> charts)
      : name_(std::move(name)), eval_(std::move(eval)), charts_(std::move(charts)) {}

  const std::string& name() const { return name_; }
  const std::vector<ChartId>& charts() const { return charts_; }
  bool has_chart(ChartId id) const { return std::find(charts_.begin(), charts_.end(), id) != charts_.end(); }

  ConnectionCoeffs operator()(ChartId id, const Vec2<double>& p) const {
    if (!has_chart(id)) throw Error(ErrorCode::point_outside_domain, "connection '" + name_ + "' not given in chart " + std::string(to_string(id)));
    return eval_(id, p);
  }

 private:
  std::string name_;
  Eval eval_;
  std::vector<ChartId> charts_;
};

inline ConnectionField constant_connection(const ConnectionCoeffs& c, ChartId chart = ChartId::planar) {
  return ConnectionField("constant", [c](ChartId, const Vec2<double>&) { return c; }, {chart});
}

inline ConnectionField levi_civita_field(const MetricField& g, ChartId chart = ChartId::planar) {
  return ConnectionField(
      "levi-civita(" + g.name() + ")",
      [g](ChartId id, const Vec2<double>& p) { return levi_civita(eval_jet(g, Chart{id, 0.0}, p, 1)); }, {chart});
}

inline ConnectionField weyl_field(const MetricField& g, const OneFormField& beta, ChartId chart = ChartId::planar) {
  return ConnectionField(
      "weyl(" + g.name() + ", " + beta.name() + ")",
      [g, beta](ChartId id, const Vec2<double>& p) {
        const Chart c{id, 0.0};
        return weyl_connection(eval_jet(g, c, p, 1), eval_jet(beta, c, p, 0));
      },
      {chart});
}

/// Levi-Civita connection of the unit sphere in every sphere chart; its
/// geodesics are the great circles.
inline ConnectionField round_sphere_field() {
  return ConnectionField(
      "round-sphere",
      [](ChartId id, const Vec2<double>& p) {
        if (!Chart{id, 0.0}.contains(p)) throw Error(ErrorCode::point_outside_domain, "point outside chart");
        return to_connection<0>(levi_civita_jet<0>(round_metric<1>(id, p)));
      },
      {ChartId::north, ChartId::south, ChartId::gnomonic});
}

/// c + eps-modification, eps given in the coordinates of each chart of c.
inline ConnectionField epsilon_modified(const ConnectionField& c, const OneFormField& eps) {
  return ConnectionField(
      c.name() + " + eps(" + eps.name() + ")",
      [c, eps](ChartId id, const Vec2<double>& p) {
        return epsilon_modify(c(id, p), EpsilonForm{eval_jet(eps, Chart{id, 0.0}, p, 0).b});
      },
      c.charts());
}

}  // namespace projweyl

#endif  // PROJWEYL_CONNECTION_HPP
