#ifndef PROJWEYL_CHARTS_HPP
#define PROJWEYL_CHARTS_HPP

// Fixed atlas used throughout: two stereographic charts on S^2, the gnomonic
// chart centred at e_x, and the plane.
//
//   north     (X,Y,Z) -> (X, Y)/(1 - Z)        covers S^2 minus (0,0,1)
//   south     (X,Y,Z) -> (X, -Y)/(1 + Z)       covers S^2 minus (0,0,-1)
//   gnomonic  (X,Y,Z) -> (Y, Z)/X              covers X > 0
//
// north -> south is (x, y) -> (x, -y)/(x^2 + y^2), i.e. z -> 1/z, so the two
// stereographic charts are orientation compatible.  In the gnomonic chart the
// great circles are straight lines.

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "projweyl/error.hpp"
#include "projweyl/jet.hpp"
#include "projweyl/linalg.hpp"

namespace projweyl {

enum class ChartId { north, south, gnomonic, planar };

inline std::string_view to_string(ChartId id) {
  switch (id) {
    case ChartId::north: return "north";
    case ChartId::south: return "south";
    case ChartId::gnomonic: return "gnomonic";
    case ChartId::planar: return "planar";
  }
  return "?";
}

inline ChartId chart_from_string(std::string_view s) {
  if (s == "north" || s == "north-stereographic") return ChartId::north;
  if (s == "south" || s == "south-stereographic") return ChartId::south;
  if (s == "gnomonic") return ChartId::gnomonic;
  if (s == "planar") return ChartId::planar;
  throw Error(ErrorCode::malformed_config, "unknown chart '" + std::string(s) + "'");
}

inline bool on_sphere(ChartId id) { return id != ChartId::planar; }

struct Chart {
  ChartId id = ChartId::planar;
  /// Minimum angular distance (radians) kept from the excluded pole or
  /// boundary great circle.
  double margin = 0.05;

  bool contains(const Vec2<double>& p) const {
    const double r = std::hypot(p[0], p[1]);
    if (!std::isfinite(r)) return false;
    switch (id) {
      case ChartId::north:
      case ChartId::south: return r < 1.0 / std::tan(0.5 * margin);
      case ChartId::gnomonic: return r < 1.0 / std::tan(margin);
      case ChartId::planar: return true;
    }
    return false;
  }

  /// Half width of the square sampled by grid sweeps in this chart.
  double grid_extent() const {
    switch (id) {
      case ChartId::north:
      case ChartId::south: return 1.5;
      case ChartId::gnomonic: return 2.0;
      case ChartId::planar: return 1.0;
    }
    return 1.0;
  }
};

/// Chart -> R^3 (unit sphere for the sphere charts, z = 0 for the plane).
template <class T>
Vec3<T> embed(ChartId id, const T& x, const T& y) {
  using std::sqrt;
  switch (id) {
    case ChartId::north: {
      const T d = 1.0 + x * x + y * y;
      return {2.0 * x / d, 2.0 * y / d, (x * x + y * y - 1.0) / d};
    }
    case ChartId::south: {
      const T d = 1.0 + x * x + y * y;
      return {2.0 * x / d, -2.0 * y / d, (1.0 - x * x - y * y) / d};
    }
    case ChartId::gnomonic: {
      const T s = sqrt(1.0 + x * x + y * y);
      return {1.0 / s, x / s, y / s};
    }
    case ChartId::planar: return {x, y, T(0.0)};
  }
  return {T(0.0), T(0.0), T(0.0)};
}

/// R^3 -> chart; inverse of embed on the chart's image.
template <class T>
Vec2<T> chart_coords(ChartId id, const Vec3<T>& P) {
  switch (id) {
    case ChartId::north: return {P[0] / (1.0 - P[2]), P[1] / (1.0 - P[2])};
    case ChartId::south: return {P[0] / (1.0 + P[2]), -P[1] / (1.0 + P[2])};
    case ChartId::gnomonic: return {P[1] / P[0], P[2] / P[0]};
    case ChartId::planar: return {P[0], P[1]};
  }
  return {T(0.0), T(0.0)};
}

inline bool chart_image_contains(const Chart& chart, const Vec3<double>& P) {
  switch (chart.id) {
    case ChartId::north: return P[2] < 1.0 && chart.contains(chart_coords(chart.id, P));
    case ChartId::south: return P[2] > -1.0 && chart.contains(chart_coords(chart.id, P));
    case ChartId::gnomonic: return P[0] > 0.0 && chart.contains(chart_coords(chart.id, P));
    case ChartId::planar: return std::abs(P[2]) < 1e-12;
  }
  return false;
}

template <int K>
Vec2<Jet<K>> chart_variables(const Vec2<double>& p) {
  return {Jet<K>::variable(p[0], 0), Jet<K>::variable(p[1], 1)};
}

struct Transition {
  Vec2<double> point;
  Mat2<double> jacobian;  // d(to)_i / d(from)_j
};

inline Transition transition(const Chart& from, const Chart& to, const Vec2<double>& p) {
  if (!from.contains(p)) throw Error(ErrorCode::point_outside_overlap, "point not in source chart");
  if ((from.id == ChartId::planar) != (to.id == ChartId::planar))
    throw Error(ErrorCode::point_outside_overlap, "plane and sphere charts do not overlap");
  const auto v = chart_variables<1>(p);
  const Vec3<Jet<1>> P = embed(from.id, v[0], v[1]);
  const Vec3<double> Pv = {P[0].value(), P[1].value(), P[2].value()};
  if (!chart_image_contains(to, Pv)) throw Error(ErrorCode::point_outside_overlap, "point not in target chart");
  const Vec2<Jet<1>> q = chart_coords(to.id, P);
  Transition t;
  for (int i = 0; i < 2; ++i) {
    t.point[i] = q[i].value();
    t.jacobian[i][0] = q[i].partial(1, 0);
    t.jacobian[i][1] = q[i].partial(0, 1);
  }
  return t;
}

/// Partials of the embedding: column j is d(embed)/dx^j.
inline std::array<Vec3<double>, 2> embedding_tangents(ChartId id, const Vec2<double>& p) {
  const auto v = chart_variables<1>(p);
  const Vec3<Jet<1>> P = embed(id, v[0], v[1]);
  std::array<Vec3<double>, 2> t{};
  for (int k = 0; k < 3; ++k) {
    t[0][k] = P[k].partial(1, 0);
    t[1][k] = P[k].partial(0, 1);
  }
  return t;
}

/// Round (unit sphere) metric pulled back to a sphere chart, carried to order K.
template <int K>
Mat2<Jet<K>> round_metric(ChartId id, const Vec2<double>& p) {
  const auto v = chart_variables<K + 1>(p);
  const Vec3<Jet<K + 1>> P = embed(id, v[0], v[1]);
  std::array<Vec3<Jet<K>>, 2> T;
  for (int k = 0; k < 3; ++k) {
    T[0][k] = P[k].derivative(0);
    T[1][k] = P[k].derivative(1);
  }
  Mat2<Jet<K>> g;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) g[i][j] = dot(T[i], T[j]);
  return g;
}

}  // namespace projweyl

#endif  // PROJWEYL_CHARTS_HPP
