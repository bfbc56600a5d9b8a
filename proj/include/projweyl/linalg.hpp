#ifndef PROJWEYL_LINALG_HPP
#define PROJWEYL_LINALG_HPP

// Fixed-size vectors and matrices over a generic scalar (double, complex or a
// Jet).  Only the handful of operations the geometry code needs.

#include <array>
#include <cmath>

#include "projweyl/jet.hpp"

namespace projweyl {

template <class T> using Vec2 = std::array<T, 2>;
template <class T> using Vec3 = std::array<T, 3>;
template <class T> using Mat2 = std::array<std::array<T, 2>, 2>;
template <class T> using Mat3 = std::array<std::array<T, 3>, 3>;

template <class T>
T dot(const Vec3<T>& a, const Vec3<T>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class T>
Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

template <class T>
Vec3<T> operator+(const Vec3<T>& a, const Vec3<T>& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

template <class T>
Vec3<T> operator-(const Vec3<T>& a, const Vec3<T>& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

template <class T, class U>
Vec3<T> scale(const Vec3<T>& a, const U& s) {
  return {a[0] * s, a[1] * s, a[2] * s};
}

template <class T>
T norm(const Vec3<T>& a) {
  using std::sqrt;
  return sqrt(dot(a, a));
}

template <class T>
Vec3<T> normalized(const Vec3<T>& a) {
  const T n = norm(a);
  return {a[0] / n, a[1] / n, a[2] / n};
}

template <class T>
T det(const Mat2<T>& m) {
  return m[0][0] * m[1][1] - m[0][1] * m[1][0];
}

template <class T>
Mat2<T> inverse(const Mat2<T>& m) {
  const T d = det(m);
  return {{{m[1][1] / d, -m[0][1] / d}, {-m[1][0] / d, m[0][0] / d}}};
}

template <class T>
Mat2<T> transpose(const Mat2<T>& m) {
  return {{{m[0][0], m[1][0]}, {m[0][1], m[1][1]}}};
}

template <class T>
Mat2<T> matmul(const Mat2<T>& a, const Mat2<T>& b) {
  Mat2<T> r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return r;
}

template <class T>
Vec2<T> matvec(const Mat2<T>& a, const Vec2<T>& v) {
  return {a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]};
}

inline Mat2<double> identity2() { return {{{1.0, 0.0}, {0.0, 1.0}}}; }

inline double det(const Mat3<double>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

/// 3x3 inverse by cofactors; caller guarantees det != 0.
inline Mat3<double> inverse(const Mat3<double>& m) {
  const double d = det(m);
  Mat3<double> r{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int i1 = (j + 1) % 3, i2 = (j + 2) % 3, j1 = (i + 1) % 3, j2 = (i + 2) % 3;
      r[i][j] = (m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1]) / d;
    }
  }
  return r;
}

/// Column k of a 3x3 matrix.
inline Vec3<double> column(const Mat3<double>& m, int k) { return {m[0][k], m[1][k], m[2][k]}; }

/// Lower Cholesky factor L of a symmetric positive definite 2x2 (g = L L^T).
template <class T>
Mat2<T> cholesky(const Mat2<T>& g) {
  using std::sqrt;
  const T l00 = sqrt(g[0][0]);
  const T l10 = g[1][0] / l00;
  const T l11 = sqrt(g[1][1] - l10 * l10);
  return {{{l00, T(0.0)}, {l10, l11}}};
}

/// Rescales a symmetric positive definite 2x2 to unit determinant.
template <class T>
Mat2<T> det_normalized(const Mat2<T>& g) {
  using std::sqrt;
  const T s = sqrt(det(g));
  return {{{g[0][0] / s, g[0][1] / s}, {g[1][0] / s, g[1][1] / s}}};
}

}  // namespace projweyl

#endif  // PROJWEYL_LINALG_HPP
