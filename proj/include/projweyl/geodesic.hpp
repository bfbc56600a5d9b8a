#ifndef PROJWEYL_GEODESIC_HPP
#define PROJWEYL_GEODESIC_HPP

// Geodesics x'' + Gamma(x)(x', x') = 0 of a connection field, integrated with
// classical RK4 and switched between sphere charts, plus comparisons of
// unparametrised paths, closure detection and the great-circle residual.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "projweyl/charts.hpp"
#include "projweyl/connection.hpp"
#include "projweyl/error.hpp"
#include "projweyl/linalg.hpp"

namespace projweyl {

struct GeodesicState {
  ChartId chart = ChartId::planar;
  Vec2<double> x{};
  Vec2<double> v{};
  double s = 0.0;
};

struct PathPoint {
  double s = 0.0;
  ChartId chart = ChartId::planar;
  Vec2<double> x{};
  Vec2<double> v{};
  Vec3<double> P{};  // embedded position (z = 0 for planar paths)
  Vec3<double> T{};  // embedded velocity dP/ds
};

struct PathSample {
  std::vector<PathPoint> points;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
  const PathPoint& front() const { return points.front(); }
  const PathPoint& back() const { return points.back(); }
};

struct IntegrateOptions {
  /// Stereographic paths move to the other stereographic chart beyond this radius.
  double switch_radius = 1.5;
  /// Gnomonic paths move to a stereographic chart beyond this radius.
  double gnomonic_radius = 2.0;
  /// Keep every n-th step (the last point is always kept).
  int stride = 1;
};

inline PathPoint make_path_point(const GeodesicState& st) {
  PathPoint p;
  p.s = st.s;
  p.chart = st.chart;
  p.x = st.x;
  p.v = st.v;
  p.P = embed(st.chart, st.x[0], st.x[1]);
  const auto t = embedding_tangents(st.chart, st.x);
  p.T = scale(t[0], st.v[0]) + scale(t[1], st.v[1]);
  return p;
}

namespace detail {

inline Vec2<double> geodesic_acceleration(const ConnectionCoeffs& c, const Vec2<double>& v) {
  Vec2<double> a{};
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) a[i] -= c.gamma[i][k][l] * v[k] * v[l];
  return a;
}

inline ConnectionCoeffs eval_connection(const ConnectionField& conn, ChartId id, const Vec2<double>& x) {
  try {
    return conn(id, x);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::point_outside_domain) throw Error(ErrorCode::left_all_charts, "geodesic left the domain of " + conn.name());
    throw;
  }
}

inline void rk4_step(const ConnectionField& conn, GeodesicState& st, double h) {
  const auto f = [&](const Vec2<double>& x, const Vec2<double>& v) {
    return geodesic_acceleration(eval_connection(conn, st.chart, x), v);
  };
  auto add = [](const Vec2<double>& a, const Vec2<double>& b, double t) { return Vec2<double>{a[0] + t * b[0], a[1] + t * b[1]}; };
  const Vec2<double> k1x = st.v, k1v = f(st.x, st.v);
  const Vec2<double> k2x = add(st.v, k1v, h / 2), k2v = f(add(st.x, k1x, h / 2), k2x);
  const Vec2<double> k3x = add(st.v, k2v, h / 2), k3v = f(add(st.x, k2x, h / 2), k3x);
  const Vec2<double> k4x = add(st.v, k3v, h), k4v = f(add(st.x, k3x, h), k4x);
  for (int i = 0; i < 2; ++i) {
    st.x[i] += h / 6 * (k1x[i] + 2 * k2x[i] + 2 * k3x[i] + k4x[i]);
    st.v[i] += h / 6 * (k1v[i] + 2 * k2v[i] + 2 * k3v[i] + k4v[i]);
  }
  st.s += h;
}

inline void change_chart(const ConnectionField& conn, GeodesicState& st, ChartId to) {
  if (!conn.has_chart(to)) throw Error(ErrorCode::left_all_charts, "no chart of " + conn.name() + " contains the path");
  const auto t = transition(Chart{st.chart, 0.0}, Chart{to, 0.0}, st.x);
  st.x = t.point;
  st.v = matvec(t.jacobian, st.v);
  st.chart = to;
}

inline void maybe_switch(const ConnectionField& conn, GeodesicState& st, const IntegrateOptions& opt) {
  const double r = std::hypot(st.x[0], st.x[1]);
  if (!std::isfinite(r)) throw Error(ErrorCode::step_underflow, "geodesic state is not finite");
  switch (st.chart) {
    case ChartId::north:
    case ChartId::south:
      if (r > opt.switch_radius) change_chart(conn, st, st.chart == ChartId::north ? ChartId::south : ChartId::north);
      break;
    case ChartId::gnomonic:
      if (r > opt.gnomonic_radius) {
        const Vec3<double> P = embed(ChartId::gnomonic, st.x[0], st.x[1]);
        change_chart(conn, st, P[2] <= 0.0 ? ChartId::north : ChartId::south);
      }
      break;
    case ChartId::planar: break;
  }
}

}  // namespace detail

inline PathSample integrate(const ConnectionField& conn, GeodesicState start, double h, double s_max,
                            const IntegrateOptions& opt = {}) {
  if (!(h > 1e-12) || !std::isfinite(h)) throw Error(ErrorCode::step_underflow, "step size must exceed 1e-12");
  if (!(s_max >= 0.0) || s_max / h > 1e9) throw Error(ErrorCode::step_underflow, "too many steps requested");
  if (start.v[0] == 0.0 && start.v[1] == 0.0) throw Error(ErrorCode::malformed_config, "initial velocity must be nonzero");
  if (!conn.has_chart(start.chart)) throw Error(ErrorCode::left_all_charts, "start chart not covered by " + conn.name());
  if (!Chart{start.chart}.contains(start.x)) throw Error(ErrorCode::point_outside_domain, "start outside chart");
  PathSample path;
  GeodesicState st = start;
  path.points.push_back(make_path_point(st));
  const long n = std::lround(std::ceil(s_max / h - 1e-9));
  const int stride = std::max(1, opt.stride);
  for (long k = 1; k <= n; ++k) {
    const double hk = std::min(h, start.s + s_max - st.s);
    if (hk <= 1e-15) break;
    detail::rk4_step(conn, st, hk);
    detail::maybe_switch(conn, st, opt);
    if (k % stride == 0 || k == n) path.points.push_back(make_path_point(st));
  }
  return path;
}

// ---------------------------------------------------------------------------
// Unparametrised comparison.

namespace detail {

inline double point_segment_distance(const Vec3<double>& p, const Vec3<double>& a, const Vec3<double>& b) {
  const Vec3<double> ab = b - a;
  const double L2 = dot(ab, ab);
  double t = L2 > 0.0 ? dot(p - a, ab) / L2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + scale(ab, t)));
}

// max over samples of `from` of the distance to the polyline of `to`.
inline double directed_deviation(const PathSample& from, const PathSample& to) {
  const auto& q = to.points;
  if (q.size() == 1) {
    double m = 0.0;
    for (const auto& p : from.points) m = std::max(m, norm(p.P - q[0].P));
    return m;
  }
  // Bounding balls over chunks of segments prune the search.
  constexpr std::size_t kChunk = 64;
  struct Ball {
    std::size_t lo, hi;
    Vec3<double> c;
    double r;
  };
  std::vector<Ball> balls;
  for (std::size_t lo = 0; lo + 1 < q.size(); lo += kChunk) {
    const std::size_t hi = std::min(q.size() - 1, lo + kChunk);
    Vec3<double> c{};
    for (std::size_t i = lo; i <= hi; ++i) c = c + q[i].P;
    c = scale(c, 1.0 / double(hi - lo + 1));
    double r = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) r = std::max(r, norm(q[i].P - c));
    balls.push_back({lo, hi, c, r});
  }
  double worst = 0.0;
  for (const auto& p : from.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : balls) {
      if (norm(p.P - b.c) - b.r >= best) continue;
      for (std::size_t i = b.lo; i < b.hi; ++i) best = std::min(best, point_segment_distance(p.P, q[i].P, q[i + 1].P));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace detail

/// Hausdorff-type distance between two paths as point sets, in the embedding.
/// The two one-sided distances are combined by min, so a path that is an
/// initial piece of the other (same curve, different parametrisation speed)
/// has deviation close to 0.
inline double unparametrized_deviation(const PathSample& p1, const PathSample& p2) {
  if (p1.empty() || p2.empty()) throw Error(ErrorCode::empty_path, "deviation needs nonempty paths");
  return std::min(detail::directed_deviation(p1, p2), detail::directed_deviation(p2, p1));
}

// ---------------------------------------------------------------------------
// Closure.

inline constexpr double kClosureTolerance = 1e-4;
inline constexpr double kDefaultStep = 1e-3;
inline constexpr double kDefaultSMax = 50.0;

struct ClosureResult {
  bool closed = false;
  double s_return = std::numeric_limits<double>::quiet_NaN();
  double err = std::numeric_limits<double>::infinity();  // sqrt(|P - P0|^2 + |t - t0|^2) at return
  std::size_t return_index = 0;                          // sample index at or just past the return
  double min_self_distance = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline Vec3<double> unit(const Vec3<double>& v) { return scale(v, 1.0 / norm(v)); }

inline double closure_distance2(const PathPoint& a, const Vec3<double>& P0, const Vec3<double>& t0) {
  const Vec3<double> dp = a.P - P0, dt = unit(a.T) - t0;
  return dot(dp, dp) + dot(dt, dt);
}

// Position (cubic Hermite) and unit direction (quadratic through three
// samples) at parameter s within [q0.s, q2.s].
inline double interpolated_distance2(const PathPoint& q0, const PathPoint& q1, const PathPoint& q2, double s,
                                     const Vec3<double>& P0, const Vec3<double>& t0) {
  const PathPoint& a = s <= q1.s ? q0 : q1;
  const PathPoint& b = s <= q1.s ? q1 : q2;
  const double h = b.s - a.s, t = (s - a.s) / h;
  const double h00 = 2 * t * t * t - 3 * t * t + 1, h10 = t * t * t - 2 * t * t + t, h01 = -2 * t * t * t + 3 * t * t,
               h11 = t * t * t - t * t;
  const Vec3<double> P = scale(a.P, h00) + scale(a.T, h10 * h) + scale(b.P, h01) + scale(b.T, h11 * h);
  const double s0 = q0.s, s1 = q1.s, s2 = q2.s;
  const double l0 = (s - s1) * (s - s2) / ((s0 - s1) * (s0 - s2)), l1 = (s - s0) * (s - s2) / ((s1 - s0) * (s1 - s2)),
               l2 = (s - s0) * (s - s1) / ((s2 - s0) * (s2 - s1));
  const Vec3<double> d = unit(scale(unit(q0.T), l0) + scale(unit(q1.T), l1) + scale(unit(q2.T), l2));
  const Vec3<double> dp = P - P0, dt = d - t0;
  return dot(dp, dp) + dot(dt, dt);
}

}  // namespace detail

/// First return of (position, direction) to the start.  The path must leave
/// a neighbourhood of the start (closure distance > 0.5) before a return is
/// accepted.
inline ClosureResult closure_of(const PathSample& path, double tol = kClosureTolerance) {
  if (path.size() < 3) throw Error(ErrorCode::too_few_samples, "closure needs at least three samples");
  ClosureResult r;
  const auto& q = path.points;
  const Vec3<double> P0 = q[0].P, t0 = detail::unit(q[0].T);
  std::vector<double> D(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) D[i] = detail::closure_distance2(q[i], P0, t0);
  std::size_t i = 1;
  while (i < q.size() && D[i] < 0.25) ++i;
  const std::size_t left = i;
  for (++i; i + 1 < q.size(); ++i) {
    if (D[i] <= D[i - 1] && D[i] <= D[i + 1] && D[i] < 0.25) {
      // Golden-section refinement on [s_{i-1}, s_{i+1}].
      const double gr = (std::sqrt(5.0) - 1) / 2;
      double a = q[i - 1].s, b = q[i + 1].s;
      auto g = [&](double s) { return detail::interpolated_distance2(q[i - 1], q[i], q[i + 1], s, P0, t0); };
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
      const double s = 0.5 * (a + b);
      r.s_return = s - q[0].s;
      r.err = std::sqrt(std::max(0.0, std::min(g(s), D[i])));
      r.return_index = i;
      r.closed = r.err < tol;
      break;
    }
  }
  if (!r.closed && r.return_index == 0) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = left; k < q.size(); ++k) m = std::min(m, D[k]);
    r.err = std::sqrt(m);
  }
  // Embeddedness heuristic: minimum distance between samples at least a
  // quarter loop apart in parameter, over one loop.
  if (r.closed) {
    const std::size_t n = r.return_index;
    const double quarter = 0.25 * r.s_return;
    double m = std::numeric_limits<double>::infinity();
    const std::size_t step = std::max<std::size_t>(1, n / 400);
    for (std::size_t a = 0; a < n; a += step)
      for (std::size_t b = a + step; b < n; b += step) {
        const double ds = q[b].s - q[a].s;
        if (ds < quarter || ds > r.s_return - quarter) continue;
        m = std::min(m, norm(q[a].P - q[b].P));
      }
    r.min_self_distance = m;
  }
  return r;
}

/// Integrates from start until the first return, or s_max.
inline ClosureResult closure_test(const ConnectionField& conn, const GeodesicState& start, double tol = kClosureTolerance,
                                  double h = kDefaultStep, double s_max = kDefaultSMax, PathSample* loop = nullptr) {
  const PathSample path = integrate(conn, start, h, s_max);
  ClosureResult r = closure_of(path, tol);
  if (loop) {
    loop->points.assign(path.points.begin(), path.points.begin() + std::min(path.size(), r.closed ? r.return_index + 1 : path.size()));
  }
  return r;
}

/// Smallest singular value of the 3 x N matrix of embedded positions.
inline double great_circle_residual(const PathSample& path) {
  if (path.size() < 3) throw Error(ErrorCode::too_few_samples, "great-circle residual needs at least three samples");
  Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
  for (const auto& p : path.points) {
    const Eigen::Vector3d P(p.P[0], p.P[1], p.P[2]);
    M += P * P.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M);
  const Eigen::Vector3d n = es.eigenvectors().col(0);
  // sqrt of the smallest eigenvalue loses precision; project explicitly.
  double acc = 0.0;
  for (const auto& p : path.points) {
    const double d = n[0] * p.P[0] + n[1] * p.P[1] + n[2] * p.P[2];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace projweyl

#endif  // PROJWEYL_GEODESIC_HPP
