#include <catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "projweyl/flat_model.hpp"

using namespace projweyl;

namespace {

Mat3<double> diag3(double a, double b, double c) { return {{{a, 0, 0}, {0, b, 0}, {0, 0, c}}}; }

Conic offdiag_conic() {
  Mat3<double> B{};
  B[0][1] = B[1][0] = 0.3;
  return Conic(Conic::identity3(), B);
}

Mat3<double> random_unimodular(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Mat3<double> g;
    for (auto& r : g)
      for (auto& v : r) v = u(rng);
    const double d = det(g);
    if (std::abs(d) < 0.05) continue;
    const double s = std::cbrt(d);
    for (auto& r : g)
      for (auto& v : r) v /= s;
    return g;
  }
}

Vec3<double> sphere_point(int i, int j, int nt = 20, int np = 40) {
  const double th = std::numbers::pi * (i + 0.5) / nt, ph = 2.0 * std::numbers::pi * j / np;
  return {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
}

double max_abs(const Mat2<double>& a, const Mat2<double>& b) {
  double m = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

}  // namespace

TEST_CASE("conic construction and ingestion", "[flat_model]") {
  const Conic q = Conic::from_upper({1, 0, 0, 2, 0, 3, 0, 0, 0, 0, 0, 0});
  const double n = std::sqrt(14.0);
  CHECK(q.A()[1][1] == Catch::Approx(2.0 / n));
  CHECK(q.Q(2, 2) == cplx(3.0 / n, 0.0));
  CHECK(q.upper()[5] == Catch::Approx(3.0 / n));
  Mat3<double> bad = Conic::identity3();
  bad[0][1] = 1.0;
  CHECK_THROWS_AS(Conic(bad, Mat3<double>{}), Error);
  CHECK_THROWS_AS(Conic(Mat3<double>{}, Mat3<double>{}), Error);
}

TEST_CASE("has_real_points examples", "[flat_model]") {
  auto r = has_real_points(Conic(Conic::identity3(), Mat3<double>{}));
  CHECK_FALSE(r.real_points);
  CHECK(r.min_F > 1e-2);

  r = has_real_points(Conic(diag3(1, 1, -1), Mat3<double>{}));
  CHECK(r.real_points);
  CHECK(r.min_F < 1e-12);
  CHECK(std::abs(r.argmin[0] * r.argmin[0] + r.argmin[1] * r.argmin[1] - r.argmin[2] * r.argmin[2]) < 1e-6);

  r = has_real_points(Conic(Conic::identity3(), diag3(1, 2, 3)));
  CHECK_FALSE(r.real_points);

  CHECK_FALSE(has_real_points(Conic(diag3(1, 2, 3), Mat3<double>{})).real_points);
  CHECK_FALSE(has_real_points(offdiag_conic()).real_points);
  // A indefinite but B definite on its zero set: no real points.
  CHECK_FALSE(has_real_points(Conic(diag3(1, 1, -1), diag3(1, 1, 1))).real_points);
  // Real points need x^T A x = x^T B x = 0: here x = (1, 0, 1)/sqrt2 works for both.
  CHECK(has_real_points(Conic(diag3(1, 1, -1), diag3(1, 0, -1))).real_points);

  CHECK_THROWS_MATCHES(has_real_points(Conic(diag3(1, 1, 0), Mat3<double>{})), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == ErrorCode::degenerate_conic; }));
}

TEST_CASE("rho examples", "[flat_model]") {
  auto u = rho(ProjPoint{{cplx(0, 0), cplx(0, -1), cplx(1, 0)}});
  CHECK(std::abs(u[0] - 1.0) < 1e-15);
  CHECK(std::abs(u[1]) < 1e-15);
  CHECK(std::abs(u[2]) < 1e-15);
  u = rho(ProjPoint{{cplx(1, 0), cplx(0, 1), cplx(0, 0)}});
  CHECK(std::abs(u[2] - 1.0) < 1e-15);
  CHECK_THROWS_MATCHES(rho(ProjPoint{{cplx(1), cplx(2), cplx(3)}}), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == ErrorCode::real_point_input; }));

  // Invariance under complex rescaling.
  const ProjPoint z{{cplx(0.3, 1.0), cplx(-0.2, 0.5), cplx(1.1, -0.4)}};
  ProjPoint w = z;
  for (auto& c : w.z) c *= cplx(-0.7, 2.1);
  const auto a = rho(z), b = rho(w);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-14);
}

TEST_CASE("tau examples", "[flat_model]") {
  const ProjPoint z = tau(Conic::identity3());
  CHECK(z.z[0] == cplx(0, 0));
  CHECK(z.z[1] == cplx(0, -1));
  CHECK(z.z[2] == cplx(1, 0));
  CHECK_THROWS_MATCHES(tau(diag3(2, 1, 1)), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == ErrorCode::non_unimodular; }));

  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  for (int n = 0; n < 100; ++n) {
    const auto g = random_unimodular(rng);
    const auto g0 = normalized(column(g, 0));
    const auto u = rho(tau(g));
    for (int i = 0; i < 3; ++i) CHECK(std::abs(u[i] - g0[i]) < 1e-12);

    // Right multiplication by the rotation p_{z,0}, z = e^{i theta}.
    const double th = ang(rng);
    Mat3<double> r = Conic::identity3();
    r[1][1] = std::cos(th);
    r[2][1] = std::sin(th);
    r[1][2] = -std::sin(th);
    r[2][2] = std::cos(th);
    Mat3<double> gr{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) gr[i][j] += g[i][k] * r[k][j];
    CHECK(projective_distance(tau(gr), tau(g)) < 1e-12);
  }
}

TEST_CASE("fiber_section examples", "[flat_model]") {
  const Conic id(Conic::identity3(), Mat3<double>{});
  const double s = 1.0 / std::sqrt(2.0);
  auto z = fiber_section(id, {0, 0, 1});
  CHECK(projective_distance(z, ProjPoint{{cplx(1), cplx(0, 1), cplx(0)}}) < 1e-14);
  CHECK(std::abs(z.z[0] - s) < 1e-15);
  z = fiber_section(id, {1, 0, 0});
  CHECK(projective_distance(z, ProjPoint{{cplx(0), cplx(1), cplx(0, 1)}}) < 1e-14);

  std::mt19937_64 rng(67);
  std::normal_distribution<double> nd;
  for (const Conic& q : {id, Conic(diag3(1, 2, 3), Mat3<double>{}), offdiag_conic(), Conic(Conic::identity3(), diag3(1, 2, 3))}) {
    for (int n = 0; n < 50; ++n) {
      const Vec3<double> u = normalized(Vec3<double>{nd(rng), nd(rng), nd(rng)});
      const auto w = fiber_section(q, u);
      CHECK(std::abs(q.bilinear(w.z, w.z)) < 1e-10);
      CHECK(std::abs(u[0] * w.z[0] + u[1] * w.z[1] + u[2] * w.z[2]) < 1e-12);
    }
  }
}

TEST_CASE("rho inverts fiber_section on a spherical grid", "[flat_model]") {
  for (const Conic& q : {Conic(Conic::identity3(), Mat3<double>{}), Conic(diag3(1, 2, 3), Mat3<double>{}), offdiag_conic()}) {
    double worst = 0.0;
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 40; ++j) {
        const auto u = sphere_point(i, j);
        const auto r = rho(fiber_section(q, u));
        worst = std::max(worst, norm(r - u));
      }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("fiber_section is continuous along great circles", "[flat_model]") {
  // Second differences of a phase-aligned representative along each path;
  // a branch jump would show up as an O(1) spike.
  const Conic q = offdiag_conic();
  const std::array<std::pair<Vec3<double>, Vec3<double>>, 3> circles = {
      std::pair{Vec3<double>{1, 0, 0}, Vec3<double>{0, 0, 1}},
      std::pair{Vec3<double>{0, 1, 0}, normalized(Vec3<double>{1, 0, 1})},
      std::pair{normalized(Vec3<double>{1, 1, 1}), normalized(Vec3<double>{1, -1, 0})}};
  const double h = 1e-3;
  double worst = 0.0;
  for (const auto& [e1, e2] : circles) {
    std::vector<Vec3<cplx>> zs;
    for (int k = 0; k <= int(2 * std::numbers::pi / h); ++k) {
      const Vec3<double> u = scale(e1, std::cos(k * h)) + scale(e2, std::sin(k * h));
      auto z = fiber_section(q, u).z;
      if (!zs.empty()) {
        cplx ip = 0.0;
        for (int i = 0; i < 3; ++i) ip += std::conj(zs.back()[i]) * z[i];
        const cplx ph = std::conj(ip) / std::abs(ip);
        for (auto& c : z) c *= ph;
      }
      zs.push_back(z);
    }
    for (std::size_t k = 1; k + 1 < zs.size(); ++k) {
      double d = 0.0;
      for (int i = 0; i < 3; ++i) d = std::max(d, std::abs(zs[k + 1][i] - 2.0 * zs[k][i] + zs[k - 1][i]));
      worst = std::max(worst, d);
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("decode_conformal examples", "[flat_model]") {
  const ProjPoint z{{cplx(1), cplx(0, 1), cplx(0)}};
  const auto d = decode_conformal(z);
  CHECK(std::abs(d.u[2] - 1.0) < 1e-15);
  CHECK(max_abs(d.G, identity2()) < 1e-15);

  const ProjPoint w{{cplx(0.3, 1.0), cplx(-0.2, 0.5), cplx(1.1, -0.4)}};
  ProjPoint w2 = w;
  for (auto& c : w2.z) c *= 2.0 * std::polar(1.0, std::numbers::pi / 4);
  CHECK(max_abs(decode_conformal(w).G, decode_conformal(w2).G) < 1e-14);
  CHECK_THROWS_AS(decode_conformal(ProjPoint{{cplx(1), cplx(2), cplx(3)}}), Error);
}

TEST_CASE("decode of tau matches the jet pushforward Gram oracle", "[flat_model]") {
  std::mt19937_64 rng(71);
  for (int n = 0; n < 100; ++n) {
    const auto g = random_unimodular(rng);
    const auto d = decode_conformal(tau(g));
    // v_i = projection of g_i to u^perp, scaled by 1/|g0|; the class declares v_1, v_2 orthonormal.
    const Vec3<double> g0 = column(g, 0);
    const double n0 = norm(g0);
    const Vec3<double> u = scale(g0, 1.0 / n0);
    Mat2<double> M;  // column i = coordinates of v_i in the decode basis
    for (int i = 0; i < 2; ++i) {
      const Vec3<double> gi = column(g, i + 1);
      const Vec3<double> v = scale(gi - scale(u, dot(u, gi)), 1.0 / n0);
      for (int k = 0; k < 2; ++k) M[k][i] = dot(v, d.basis[k]);
    }
    Mat2<double> gram{};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l) gram[i][j] += M[i][l] * M[j][l];
    CHECK(max_abs(d.G, det_normalized(inverse(gram))) < 1e-10);
  }
}

TEST_CASE("conic_weyl_structure examples", "[flat_model]") {
  const Conic id(Conic::identity3(), Mat3<double>{});
  const Chart gnomonic{ChartId::gnomonic};
  const auto w = conic_weyl_structure(id, gnomonic, {0.0, 0.0});
  CHECK(max_abs(w.metric, identity2()) < 1e-14);
  CHECK(std::abs(w.beta[0]) < 1e-14);
  CHECK(std::abs(w.beta[1]) < 1e-14);

  CHECK_THROWS_MATCHES(conic_weyl_structure(Conic(diag3(1, 1, -1), Mat3<double>{}), gnomonic, {0.0, 0.0}), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == ErrorCode::inadmissible_conic; }));
  CHECK_THROWS_AS(conic_weyl_structure(id, Chart{ChartId::planar}, {0.0, 0.0}), Error);
}

TEST_CASE("conic Weyl structures are compatible with the flat structure", "[flat_model]") {
  for (const Conic& q : {Conic(diag3(1, 2, 3), Mat3<double>{}), offdiag_conic()}) {
    const ConicStructure cs(q);
    for (const ChartId id : {ChartId::gnomonic, ChartId::north, ChartId::south}) {
      const Chart chart{id};
      double worst = 0.0;
      for (const auto& p : chart_grid(chart, 17, [](const Vec2<double>&) { return true; })) {
        const auto r = cs.at(chart, p);
        worst = std::max(worst, r.residual);
        CHECK(std::abs(det(r.metric) - 1.0) < 1e-12);
      }
      CHECK(worst < 1e-7);
    }
  }
}

TEST_CASE("generic conic has a non-closed beta", "[flat_model]") {
  const ConicStructure cs(offdiag_conic());
  const auto beta = cs.beta(ChartId::gnomonic);
  double max_db = 0.0;
  for (const auto& p : chart_grid(Chart{ChartId::gnomonic}, 9, [](const Vec2<double>&) { return true; })) {
    const auto b = eval_jet(beta, Chart{ChartId::gnomonic}, p, 1);
    max_db = std::max(max_db, std::abs(b.db[0][1] - b.db[1][0]));
  }
  CHECK(max_db > 1e-3);

  // The round conic gives exact beta.
  const ConicStructure round(Conic(Conic::identity3(), Mat3<double>{}));
  const auto rb = round.beta(ChartId::gnomonic);
  for (const auto& p : chart_grid(Chart{ChartId::gnomonic}, 9, [](const Vec2<double>&) { return true; })) {
    const auto b = eval_jet(rb, Chart{ChartId::gnomonic}, p, 1);
    CHECK(std::abs(b.db[0][1] - b.db[1][0]) < 1e-10);
  }
}

TEST_CASE("the round conic reproduces the round Weyl structure", "[flat_model]") {
  const ConicStructure cs(Conic(Conic::identity3(), Mat3<double>{}));
  for (const ChartId id : {ChartId::north, ChartId::south, ChartId::gnomonic}) {
    const Chart chart{id};
    for (const auto& p : chart_grid(chart, 13, [](const Vec2<double>&) { return true; })) {
      const auto r = cs.at(chart, p);
      const auto g = round_metric<1>(id, p);
      Mat2<double> gv;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) gv[i][j] = g[i][j].value();
      CHECK(max_abs(r.metric, det_normalized(gv)) < 1e-9);
      // beta = -d(1/4 ln det g_round): the det-1 shift of (g_round, 0).
      const Jet<1> h = 0.25 * log(det(g));
      CHECK(std::abs(r.beta[0] + h.partial(1, 0)) < 1e-9);
      CHECK(std::abs(r.beta[1] + h.partial(0, 1)) < 1e-9);
    }
  }
}

TEST_CASE("conic metric jets match finite differences", "[flat_model]") {
  const Conic q = offdiag_conic();
  const Chart north{ChartId::north};
  const Vec2<double> p = {0.4, -0.3};
  const auto j = conic_metric_jet<2>(q, ChartId::north, p);
  const auto bj = conic_weyl_jet<1>(q, ChartId::north, p);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      auto g = [&](const Vec2<double>& x) { return conic_metric_jet<0>(q, ChartId::north, x)[a][b].value(); };
      CHECK(std::abs(j[a][b].partial(1, 0) - fd_oracle(g, north, p, {1, 0})) < 1e-8);
      CHECK(std::abs(j[a][b].partial(1, 1) - fd_oracle(g, north, p, {1, 1})) < 1e-6);
    }
  for (int a = 0; a < 2; ++a) {
    auto b = [&](const Vec2<double>& x) { return conic_weyl_jet<0>(q, ChartId::north, x).beta[a].value(); };
    CHECK(std::abs(bj.beta[a].partial(0, 1) - fd_oracle(b, north, p, {0, 1})) < 1e-8);
  }
}

TEST_CASE("rotating the conic pulls back the Weyl structure", "[flat_model]") {
  // R: (X, Y, Z) -> (X, -Z, Y); on the gnomonic chart r(x, y) = (-y, x).
  const Mat3<double> R = {{{1, 0, 0}, {0, 0, -1}, {0, 1, 0}}};
  const Mat3<double> A = diag3(1, 2, 3);
  Mat3<double> RA{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) RA[i][j] += R[i][k] * A[k][l] * R[j][l];
  const Conic q(A, Mat3<double>{}), qr(RA, Mat3<double>{});
  const Mat2<double> r = {{{0, -1}, {1, 0}}};
  const Chart gn{ChartId::gnomonic};
  for (const auto& p : chart_grid(gn, 9, [](const Vec2<double>&) { return true; })) {
    const Vec2<double> rp = matvec(r, p);
    const auto w = conic_weyl_point(q, gn, p);
    const auto wr = conic_weyl_point(qr, gn, rp);
    CHECK(max_abs(w.metric, matmul(transpose(r), matmul(wr.metric, r))) < 1e-8);
    const auto rb = matvec(transpose(r), wr.beta);
    CHECK(std::abs(w.beta[0] - rb[0]) < 1e-8);
    CHECK(std::abs(w.beta[1] - rb[1]) < 1e-8);
  }
}

TEST_CASE("conic Weyl connection is projectively flat in every chart", "[flat_model]") {
  const ConicStructure cs(Conic(diag3(1, 2, 3), Mat3<double>{}));
  const auto conn = cs.connection();
  const auto round = round_sphere_field();
  std::mt19937_64 rng(73);
  std::uniform_real_distribution<double> u(-1.4, 1.4);
  for (const ChartId id : {ChartId::north, ChartId::south, ChartId::gnomonic}) {
    for (int n = 0; n < 20; ++n) {
      const Vec2<double> p = {u(rng), u(rng)};
      CHECK(projectively_equivalent(conn(id, p), round(id, p), 1e-7).equivalent);
    }
  }
  CHECK_THROWS_AS(ConicStructure(Conic(diag3(1, 1, -1), Mat3<double>{})), Error);
}
