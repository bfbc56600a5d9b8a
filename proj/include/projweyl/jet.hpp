#ifndef PROJWEYL_JET_HPP
#define PROJWEYL_JET_HPP

// Truncated bivariate Taylor series ("jets") used as a forward-mode
// differentiation scalar.  A Jet<K, S> carries the Taylor coefficients
//
//     f(x0 + dx, y0 + dy) = sum_{a+b <= K} c_{ab} dx^a dy^b
//
// with coefficients in S (double or std::complex<double>).  Arithmetic and
// the elementary functions below are exact up to total degree K, so partial
// derivatives fall out as c_{ab} * a! * b!.

#include <array>
#include <cmath>
#include <complex>
#include <type_traits>

namespace projweyl {

namespace detail {

constexpr double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

template <class T> struct is_complex : std::false_type {};
template <class T> struct is_complex<std::complex<T>> : std::true_type {};

}  // namespace detail

template <int K, class S = double>
class Jet {
  static_assert(K >= 0 && K <= 5, "jet order out of supported range");

 public:
  using scalar_type = S;
  static constexpr int order = K;
  static constexpr int size = (K + 1) * (K + 2) / 2;

  static constexpr int index(int a, int b) {
    const int n = a + b;
    return n * (n + 1) / 2 + b;
  }

  constexpr Jet() : c_{} {}
  constexpr Jet(S constant) : c_{} { c_[0] = constant; }  // NOLINT: implicit by design of a scalar type

  /// Coordinate function x (dir = 0) or y (dir = 1) expanded around x0.
  static Jet variable(S x0, int dir) {
    Jet j(x0);
    if constexpr (K >= 1) j.c_[dir == 0 ? index(1, 0) : index(0, 1)] = S(1);
    return j;
  }

  S value() const { return c_[0]; }
  S coeff(int a, int b) const { return c_[index(a, b)]; }
  S& coeff(int a, int b) { return c_[index(a, b)]; }
  const std::array<S, size>& coeffs() const { return c_; }
  std::array<S, size>& coeffs() { return c_; }

  /// Partial derivative d^a/dx^a d^b/dy^b at the expansion point.
  S partial(int a, int b) const {
    if (a + b > K) return S(0);
    return c_[index(a, b)] * S(detail::factorial(a) * detail::factorial(b));
  }

  /// Derivative along x (dir = 0) or y (dir = 1); loses one order.
  auto derivative(int dir) const {
    static_assert(K >= 1, "cannot differentiate an order-0 jet");
    Jet<K - 1, S> r;
    for (int n = 0; n < K; ++n) {
      for (int b = 0; b <= n; ++b) {
        const int a = n - b;
        if (dir == 0)
          r.coeff(a, b) = S(a + 1) * coeff(a + 1, b);
        else
          r.coeff(a, b) = S(b + 1) * coeff(a, b + 1);
      }
    }
    return r;
  }

  template <int L>
  Jet<L, S> truncate() const {
    static_assert(L <= K, "truncate can only lower the order");
    Jet<L, S> r;
    for (int i = 0; i < Jet<L, S>::size; ++i) r.coeffs()[i] = c_[i];
    return r;
  }

  Jet& operator+=(const Jet& o) {
    for (int i = 0; i < size; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int i = 0; i < size; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    *this = *this * o;
    return *this;
  }
  Jet& operator/=(const Jet& o) {
    *this = *this / o;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(const Jet& a) {
    Jet r;
    for (int i = 0; i < size; ++i) r.c_[i] = -a.c_[i];
    return r;
  }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (int n1 = 0; n1 <= K; ++n1) {
      for (int b1 = 0; b1 <= n1; ++b1) {
        const S x = a.c_[index(n1 - b1, b1)];
        if (x == S(0)) continue;
        for (int n2 = 0; n1 + n2 <= K; ++n2) {
          for (int b2 = 0; b2 <= n2; ++b2) {
            r.c_[index(n1 - b1 + n2 - b2, b1 + b2)] += x * b.c_[index(n2 - b2, b2)];
          }
        }
      }
    }
    return r;
  }

  friend Jet operator/(const Jet& a, const Jet& b) { return a * inverse(b); }

  friend Jet inverse(const Jet& u) {
    std::array<S, K + 1> d{};
    const S x0 = u.value();
    S p = S(1) / x0;
    for (int n = 0; n <= K; ++n) {
      d[n] = p * S(detail::factorial(n)) * S((n % 2 == 0) ? 1.0 : -1.0);
      p /= x0;
    }
    return compose(u, d);
  }

  /// f(u) given the derivatives f^(n)(u.value()) for n = 0..K.
  friend Jet compose(const Jet& u, const std::array<S, K + 1>& derivs) {
    Jet du = u;
    du.c_[0] = S(0);
    Jet r(derivs[K] / S(detail::factorial(K)));
    for (int n = K - 1; n >= 0; --n) {
      r = r * du;
      r.c_[0] += derivs[n] / S(detail::factorial(n));
    }
    return r;
  }

 private:
  std::array<S, size> c_;
};

// Scalar operands convert to S, so plain doubles work with complex jets.
template <int K, class S>
Jet<K, S> operator+(const Jet<K, S>& a, std::type_identity_t<S> b) { return a + Jet<K, S>(b); }
template <int K, class S>
Jet<K, S> operator+(std::type_identity_t<S> a, const Jet<K, S>& b) { return Jet<K, S>(a) + b; }
template <int K, class S>
Jet<K, S> operator-(const Jet<K, S>& a, std::type_identity_t<S> b) { return a - Jet<K, S>(b); }
template <int K, class S>
Jet<K, S> operator-(std::type_identity_t<S> a, const Jet<K, S>& b) { return Jet<K, S>(a) - b; }
template <int K, class S>
Jet<K, S> operator*(const Jet<K, S>& a, std::type_identity_t<S> b) {
  Jet<K, S> r = a;
  for (auto& c : r.coeffs()) c *= b;
  return r;
}
template <int K, class S>
Jet<K, S> operator*(std::type_identity_t<S> a, const Jet<K, S>& b) { return b * a; }
template <int K, class S>
Jet<K, S> operator/(const Jet<K, S>& a, std::type_identity_t<S> b) { return a * (S(1) / b); }
template <int K, class S>
Jet<K, S> operator/(std::type_identity_t<S> a, const Jet<K, S>& b) { return Jet<K, S>(a) / b; }

template <int K, class S>
Jet<K, S> exp(const Jet<K, S>& u) {
  using std::exp;
  std::array<S, K + 1> d;
  d.fill(exp(u.value()));
  return compose(u, d);
}

template <int K, class S>
Jet<K, S> log(const Jet<K, S>& u) {
  using std::log;
  std::array<S, K + 1> d{};
  const S x0 = u.value();
  d[0] = log(x0);
  S p = S(1) / x0;
  for (int n = 1; n <= K; ++n) {
    d[n] = p * S(detail::factorial(n - 1)) * S((n % 2 == 1) ? 1.0 : -1.0);
    p /= x0;
  }
  return compose(u, d);
}

/// u^a for real exponent a.  For complex jets the branch is the principal one
/// at the expansion point.
template <int K, class S>
Jet<K, S> pow(const Jet<K, S>& u, double a) {
  using std::pow;
  std::array<S, K + 1> d{};
  const S x0 = u.value();
  S base = pow(x0, S(a));
  double falling = 1.0;
  S p = S(1);
  for (int n = 0; n <= K; ++n) {
    d[n] = base * S(falling) / p;
    falling *= (a - n);
    p *= x0;
  }
  return compose(u, d);
}

template <int K, class S>
Jet<K, S> sqrt(const Jet<K, S>& u) {
  using std::sqrt;
  std::array<S, K + 1> d{};
  const S x0 = u.value();
  const S s0 = sqrt(x0);
  double falling = 1.0;
  S p = S(1);
  for (int n = 0; n <= K; ++n) {
    d[n] = s0 * S(falling) / p;
    falling *= (0.5 - n);
    p *= x0;
  }
  return compose(u, d);
}

template <int K, class S>
Jet<K, S> sin(const Jet<K, S>& u) {
  using std::cos;
  using std::sin;
  std::array<S, K + 1> d{};
  const S s = sin(u.value()), c = cos(u.value());
  for (int n = 0; n <= K; ++n) {
    switch (n % 4) {
      case 0: d[n] = s; break;
      case 1: d[n] = c; break;
      case 2: d[n] = -s; break;
      default: d[n] = -c; break;
    }
  }
  return compose(u, d);
}

template <int K, class S>
Jet<K, S> cos(const Jet<K, S>& u) {
  using std::cos;
  using std::sin;
  std::array<S, K + 1> d{};
  const S s = sin(u.value()), c = cos(u.value());
  for (int n = 0; n <= K; ++n) {
    switch (n % 4) {
      case 0: d[n] = c; break;
      case 1: d[n] = -s; break;
      case 2: d[n] = -c; break;
      default: d[n] = s; break;
    }
  }
  return compose(u, d);
}

template <int K>
Jet<K, double> real(const Jet<K, std::complex<double>>& z) {
  Jet<K, double> r;
  for (int i = 0; i < Jet<K>::size; ++i) r.coeffs()[i] = z.coeffs()[i].real();
  return r;
}

template <int K>
Jet<K, double> imag(const Jet<K, std::complex<double>>& z) {
  Jet<K, double> r;
  for (int i = 0; i < Jet<K>::size; ++i) r.coeffs()[i] = z.coeffs()[i].imag();
  return r;
}

template <int K>
Jet<K, std::complex<double>> complexify(const Jet<K, double>& x) {
  Jet<K, std::complex<double>> r;
  for (int i = 0; i < Jet<K>::size; ++i) r.coeffs()[i] = x.coeffs()[i];
  return r;
}

// Uniform access for code templated on double or Jet scalars.

inline double value_of(double x) { return x; }
inline std::complex<double> value_of(std::complex<double> x) { return x; }
template <int K, class S>
S value_of(const Jet<K, S>& x) { return x.value(); }

template <class T> struct jet_traits {
  static constexpr int order = 0;
};
template <int K, class S> struct jet_traits<Jet<K, S>> {
  static constexpr int order = K;
};

/// Scalar type for a real quantity carried at the same order as T.
template <class T> struct real_of { using type = double; };
template <int K, class S> struct real_of<Jet<K, S>> { using type = Jet<K, double>; };

template <class T> struct complex_of { using type = std::complex<double>; };
template <int K, class S> struct complex_of<Jet<K, S>> { using type = Jet<K, std::complex<double>>; };

inline std::complex<double> complexify(double x) { return x; }
inline double real(std::complex<double> z) { return z.real(); }
inline double imag(std::complex<double> z) { return z.imag(); }

}  // namespace projweyl

#endif  // PROJWEYL_JET_HPP
