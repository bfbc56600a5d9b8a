#ifndef PROJWEYL_FIELDS_HPP
#define PROJWEYL_FIELDS_HPP

// Scalar, metric and 1-form fields on a chart with jet (derivative) access,
// plus the finite-difference oracle that referees them.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "projweyl/charts.hpp"
#include "projweyl/error.hpp"
#include "projweyl/jet.hpp"
#include "projweyl/linalg.hpp"

namespace projweyl {

/// Highest jet order any field can be evaluated at.  Public jets go to 3;
/// the extra order lets derived fields (e.g. det-1 rescaling) differentiate
/// their inputs once more.
inline constexpr int kMaxFieldOrder = 4;

struct ScalarJet {
  int order = 0;
  double value = 0.0;
  Vec2<double> grad{};
  Mat2<double> hess{};
  std::array<Mat2<double>, 2> third{};  // third[i][j][k]
};

struct MetricJet {
  int order = 0;
  Mat2<double> g = identity2();
  std::array<Mat2<double>, 2> dg{};                      // dg[m][i][j] = d_m g_ij
  std::array<std::array<Mat2<double>, 2>, 2> d2g{};      // d2g[m][n][i][j]
};

struct OneFormJet {
  int order = 0;
  Vec2<double> b{};
  Mat2<double> db{};  // db[m][i] = d_m beta_i
};

namespace detail {

// Partial d_{i1} d_{i2} ... of a jet, indices in {0,1}.
template <int K>
double partial_of(const Jet<K>& j, std::initializer_list<int> idx) {
  int a = 0, b = 0;
  for (int i : idx) (i == 0 ? a : b) += 1;
  return j.partial(a, b);
}

}  // namespace detail

template <int K>
ScalarJet to_scalar_jet(const Jet<K>& j, int order) {
  ScalarJet s;
  s.order = order;
  s.value = j.value();
  for (int i = 0; i < 2; ++i) {
    if (order >= 1) s.grad[i] = detail::partial_of(j, {i});
    for (int k = 0; k < 2; ++k) {
      if (order >= 2) s.hess[i][k] = detail::partial_of(j, {i, k});
      for (int l = 0; l < 2; ++l)
        if (order >= 3) s.third[i][k][l] = detail::partial_of(j, {i, k, l});
    }
  }
  return s;
}

template <int K>
MetricJet to_metric_jet(const Mat2<Jet<K>>& g, int order) {
  MetricJet m;
  m.order = order;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      m.g[i][j] = g[i][j].value();
      for (int a = 0; a < 2; ++a) {
        if (order >= 1) m.dg[a][i][j] = detail::partial_of(g[i][j], {a});
        for (int b = 0; b < 2; ++b)
          if (order >= 2) m.d2g[a][b][i][j] = detail::partial_of(g[i][j], {a, b});
      }
    }
  }
  return m;
}

template <int K>
OneFormJet to_oneform_jet(const Vec2<Jet<K>>& b, int order) {
  OneFormJet o;
  o.order = order;
  for (int i = 0; i < 2; ++i) {
    o.b[i] = b[i].value();
    for (int m = 0; m < 2; ++m)
      if (order >= 1) o.db[m][i] = detail::partial_of(b[i], {m});
  }
  return o;
}

/// Jet<1> view of a pointwise value and its gradient.
inline Jet<1> jet1(double v, double dx, double dy) {
  Jet<1> j(v);
  j.coeff(1, 0) = dx;
  j.coeff(0, 1) = dy;
  return j;
}

/// Metric as order-1 jets (needs m.order >= 2 for exact derivatives of dg).
inline Mat2<Jet<1>> metric_as_jet1(const MetricJet& m) {
  Mat2<Jet<1>> g;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) g[i][j] = jet1(m.g[i][j], m.dg[0][i][j], m.dg[1][i][j]);
  return g;
}

inline Vec2<Jet<1>> oneform_as_jet1(const OneFormJet& o) {
  return {jet1(o.b[0], o.db[0][0], o.db[1][0]), jet1(o.b[1], o.db[0][1], o.db[1][1])};
}

template <int K> using ScalarValue = Jet<K>;
template <int K> using MetricValue = Mat2<Jet<K>>;
template <int K> using OneFormValue = Vec2<Jet<K>>;

/// Type-erased field whose values V<K> can be produced at every jet order
/// K = 0..kMaxFieldOrder.  The evaluator is any callable
/// `(std::integral_constant<int, K>, const Vec2<double>& p) -> V<K>`.
/// Fields are immutable after construction and safe to share across threads.
template <template <int> class V>
class JetField {
 public:
  using Domain = std::function<bool(const Vec2<double>&)>;

  JetField() : JetField("zero", [](auto order, const Vec2<double>&) { return V<decltype(order)::value>{}; }) {}

  template <class F>
  JetField(std::string name, F f, Domain domain = {})
      : name_(std::move(name)), domain_(std::move(domain)) {
    bind(f, std::make_integer_sequence<int, kMaxFieldOrder + 1>{});
  }

  const std::string& name() const { return name_; }

  bool defined_at(const Vec2<double>& p) const { return !domain_ || domain_(p); }

  template <int K>
  V<K> evaluate(const Vec2<double>& p) const {
    static_assert(K >= 0 && K <= kMaxFieldOrder);
    if (!defined_at(p)) throw Error(ErrorCode::point_outside_domain, "field '" + name_ + "' undefined at point");
    return std::get<K>(fns_)(p);
  }

 private:
  template <class F, int... Ks>
  void bind(F& f, std::integer_sequence<int, Ks...>) {
    ((std::get<Ks>(fns_) = [f](const Vec2<double>& p) { return f(std::integral_constant<int, Ks>{}, p); }), ...);
  }

  template <int... Ks>
  static auto make_tuple_type(std::integer_sequence<int, Ks...>)
      -> std::tuple<std::function<V<Ks>(const Vec2<double>&)>...>;

  std::string name_;
  Domain domain_;
  decltype(make_tuple_type(std::make_integer_sequence<int, kMaxFieldOrder + 1>{})) fns_;
};

using ScalarField = JetField<ScalarValue>;
using MetricField = JetField<MetricValue>;
using OneFormField = JetField<OneFormValue>;

/// Builds a field from a generic expression `f(x, y)` in the chart
/// coordinates, evaluated with jet arithmetic.
template <template <int> class V, class Expr>
JetField<V> field_from_expression(std::string name, Expr expr, typename JetField<V>::Domain domain = {}) {
  return JetField<V>(
      std::move(name),
      [expr](auto order, const Vec2<double>& p) {
        constexpr int K = decltype(order)::value;
        const auto v = chart_variables<K>(p);
        return expr(v[0], v[1]);
      },
      std::move(domain));
}

// ---------------------------------------------------------------------------
// Standard fields.

inline ScalarField flat_factor() {
  return field_from_expression<ScalarValue>("flat", [](const auto& x, const auto&) { return 0.0 * x; });
}

/// Round unit sphere in a stereographic chart: g = e^{2f} delta.
inline ScalarField round_factor() {
  return field_from_expression<ScalarValue>(
      "round", [](const auto& x, const auto& y) { return std::numbers::ln2 - log(1.0 + x * x + y * y); });
}

/// Poincare disc, curvature -1, defined for r < 1.
inline ScalarField hyperbolic_factor() {
  return field_from_expression<ScalarValue>(
      "hyperbolic", [](const auto& x, const auto& y) { return std::numbers::ln2 - log(1.0 - x * x - y * y); },
      [](const Vec2<double>& p) { return p[0] * p[0] + p[1] * p[1] < 1.0; });
}

/// f = amplitude * exp(-r^2); Gauss curvature of e^{2f} delta is positive for r < 1.
inline ScalarField bump_factor(double amplitude) {
  return field_from_expression<ScalarValue>("bump", [amplitude](const auto& x, const auto& y) {
    return amplitude * exp(-(x * x + y * y));
  });
}

/// Polynomial sum c[i][j] x^i y^j.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<std::vector<double>> coeffs) : c_(std::move(coeffs)) {}

  template <class T>
  T operator()(const T& x, const T& y) const {
    T r = 0.0 * x;
    T xi = 1.0 + 0.0 * x;
    for (const auto& row : c_) {
      T yj = 1.0 + 0.0 * y;
      for (double c : row) {
        if (c != 0.0) r += (c * xi) * yj;
        yj = yj * y;
      }
      xi = xi * x;
    }
    return r;
  }

  int degree() const {
    int d = -1;
    for (std::size_t i = 0; i < c_.size(); ++i)
      for (std::size_t j = 0; j < c_[i].size(); ++j)
        if (c_[i][j] != 0.0) d = std::max(d, int(i + j));
    return d;
  }

  const std::vector<std::vector<double>>& coeffs() const { return c_; }

 private:
  std::vector<std::vector<double>> c_;
};

inline ScalarField polynomial_factor(Polynomial poly, std::string name = "poly") {
  return field_from_expression<ScalarValue>(std::move(name), [poly](const auto& x, const auto& y) { return poly(x, y); });
}

/// g = e^{2f} delta.
inline MetricField conformal_metric(const ScalarField& f) {
  return MetricField(
      "conformal(" + f.name() + ")",
      [f](auto order, const Vec2<double>& p) {
        constexpr int K = decltype(order)::value;
        const Jet<K> e = exp(2.0 * f.template evaluate<K>(p));
        return Mat2<Jet<K>>{{{e, Jet<K>(0.0)}, {Jet<K>(0.0), e}}};
      },
      [f](const Vec2<double>& p) { return f.defined_at(p); });
}

inline OneFormField zero_oneform() {
  return field_from_expression<OneFormValue>("zero", [](const auto& x, const auto&) {
    return std::array{0.0 * x, 0.0 * x};
  });
}

inline OneFormField constant_oneform(double b1, double b2) {
  return field_from_expression<OneFormValue>("constant", [b1, b2](const auto& x, const auto&) {
    return std::array{b1 + 0.0 * x, b2 + 0.0 * x};
  });
}

inline OneFormField polynomial_oneform(Polynomial p1, Polynomial p2, std::string name = "poly") {
  return field_from_expression<OneFormValue>(std::move(name), [p1, p2](const auto& x, const auto& y) {
    return std::array{p1(x, y), p2(x, y)};
  });
}

/// d f as a 1-form field.
inline OneFormField exterior_derivative(const ScalarField& f) {
  return OneFormField(
      "d(" + f.name() + ")",
      [f](auto order, const Vec2<double>& p) {
        constexpr int K = decltype(order)::value;
        if constexpr (K < kMaxFieldOrder) {
          const auto j = f.template evaluate<K + 1>(p);
          return Vec2<Jet<K>>{j.derivative(0), j.derivative(1)};
        } else {
          throw Error(ErrorCode::order_unsupported, "derivative field beyond maximum order");
          return Vec2<Jet<K>>{};
        }
      },
      [f](const Vec2<double>& p) { return f.defined_at(p); });
}

// ---------------------------------------------------------------------------
// eval_jet

namespace detail {

template <template <int> class V, class Convert>
auto eval_at_order(const JetField<V>& field, const Vec2<double>& p, int order, Convert convert) {
  switch (order) {
    case 0: return convert(field.template evaluate<0>(p), 0);
    case 1: return convert(field.template evaluate<1>(p), 1);
    case 2: return convert(field.template evaluate<2>(p), 2);
    case 3: return convert(field.template evaluate<3>(p), 3);
    default: throw Error(ErrorCode::order_unsupported, "jet order must be in 0..3");
  }
}

inline void check_domain(const Chart& chart, const Vec2<double>& p) {
  if (!chart.contains(p)) throw Error(ErrorCode::point_outside_domain, "point outside chart " + std::string(to_string(chart.id)));
}

}  // namespace detail

inline ScalarJet eval_jet(const ScalarField& f, const Chart& chart, const Vec2<double>& p, int order) {
  detail::check_domain(chart, p);
  return detail::eval_at_order(f, p, order, [](const auto& j, int o) { return to_scalar_jet(j, o); });
}

inline MetricJet eval_jet(const MetricField& f, const Chart& chart, const Vec2<double>& p, int order) {
  detail::check_domain(chart, p);
  return detail::eval_at_order(f, p, order, [](const auto& j, int o) { return to_metric_jet(j, o); });
}

inline OneFormJet eval_jet(const OneFormField& f, const Chart& chart, const Vec2<double>& p, int order) {
  detail::check_domain(chart, p);
  return detail::eval_at_order(f, p, order, [](const auto& j, int o) { return to_oneform_jet(j, o); });
}

inline double sample(const ScalarField& f, const Vec2<double>& p) { return f.evaluate<0>(p).value(); }

// ---------------------------------------------------------------------------
// Finite-difference oracle.
//
// Tensor-product central stencils (second order) in x then y, combined with
// one Richardson level D = (4 D(h/2) - D(h)) / 3.  Truncation error is
// O(h^4); rounding error grows like eps / h^n for an n-th derivative.

namespace detail {

inline std::vector<std::pair<int, double>> central_stencil(int n) {
  switch (n) {
    case 0: return {{0, 1.0}};
    case 1: return {{-1, -0.5}, {1, 0.5}};
    case 2: return {{-1, 1.0}, {0, -2.0}, {1, 1.0}};
    case 3: return {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}};
    default: throw Error(ErrorCode::order_unsupported, "fd_oracle supports derivative orders up to 3 per axis");
  }
}

template <class Fn>
double fd_single(const Fn& fn, const Vec2<double>& p, int a, int b, double h) {
  const auto sx = central_stencil(a);
  const auto sy = central_stencil(b);
  double acc = 0.0;
  for (const auto& [ox, wx] : sx)
    for (const auto& [oy, wy] : sy) acc += wx * wy * fn(Vec2<double>{p[0] + ox * h, p[1] + oy * h});
  return acc / std::pow(h, a + b);
}

}  // namespace detail

/// Central-difference estimate of d^a/dx^a d^b/dy^b fn at p.
template <class Fn>
double fd_oracle(const Fn& fn, const Chart& chart, const Vec2<double>& p, std::array<int, 2> multi_index, double h = 1e-3) {
  if (!(h > 0.0)) throw Error(ErrorCode::stencil_out_of_domain, "step must be positive");
  const int a = multi_index[0], b = multi_index[1];
  const double rx = (a >= 3 ? 2 : (a > 0 ? 1 : 0)) * h;
  const double ry = (b >= 3 ? 2 : (b > 0 ? 1 : 0)) * h;
  for (double sx : {-rx, rx})
    for (double sy : {-ry, ry})
      if (!chart.contains({p[0] + sx, p[1] + sy}))
        throw Error(ErrorCode::stencil_out_of_domain, "finite-difference stencil leaves the chart");
  const double coarse = detail::fd_single(fn, p, a, b, h);
  if (a + b == 0) return coarse;
  const double fine = detail::fd_single(fn, p, a, b, 0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

inline double fd_oracle(const ScalarField& f, const Chart& chart, const Vec2<double>& p, std::array<int, 2> multi_index,
                        double h = 1e-3) {
  const int a = multi_index[0], b = multi_index[1];
  const double rx = (a >= 3 ? 2 : (a > 0 ? 1 : 0)) * h;
  const double ry = (b >= 3 ? 2 : (b > 0 ? 1 : 0)) * h;
  for (double sx : {-rx, rx})
    for (double sy : {-ry, ry})
      if (!f.defined_at({p[0] + sx, p[1] + sy}))
        throw Error(ErrorCode::stencil_out_of_domain, "finite-difference stencil leaves the field domain");
  return fd_oracle([&f](const Vec2<double>& q) { return sample(f, q); }, chart, p, multi_index, h);
}

}  // namespace projweyl

#endif  // PROJWEYL_FIELDS_HPP
