#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "projweyl/cli.hpp"

using namespace projweyl;
using nlohmann::json;

namespace {

std::string data(const std::string& name) { return std::string(PROJWEYL_DATA_DIR) + "/" + name; }

struct Result {
  int code;
  std::string out, err;
};

Result call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("validate identities suite passes", "[cli]") {
  const auto r = call({"validate", "--suite", "identities", "--seed", "7"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["schema"] == 1);
  CHECK(j["pass"] == true);
  CHECK(j["checks"].size() >= 10);
  for (const auto& c : j["checks"]) CHECK(c["measured"].get<double>() < c["tolerance"].get<double>());
}

TEST_CASE("conic check verdicts", "[cli]") {
  const auto ok = call({"conic", "check", "--in", data("diag123.json")});
  REQUIRE(ok.code == 0);
  const auto j = json::parse(ok.out);
  CHECK(j["real_points"] == false);
  CHECK(j["minF"].get<double>() > 1e-2);

  const auto bad = call({"conic", "check", "--in", data("circle.json")});
  CHECK(bad.code == 2);
  CHECK(json::parse(bad.out)["real_points"] == true);

  const auto metric = call({"conic", "metric", "--in", data("circle.json")});
  CHECK(metric.code == 2);
  CHECK(json::parse(metric.out)["error"] == "inadmissible-conic");
}

TEST_CASE("compat-check verdicts", "[cli]") {
  const auto ok = call({"compat-check", "--config", data("compat_round.json")});
  REQUIRE(ok.code == 0);
  CHECK(json::parse(ok.out)["max_residual"].get<double>() < 1e-7);

  const auto bad = call({"compat-check", "--config", data("compat_gamma122.json"), "--grid", "5"});
  CHECK(bad.code == 2);
  CHECK(json::parse(bad.out)["max_residual"].get<double>() > 1e-2);
}

TEST_CASE("usage and IO errors exit 1", "[cli]") {
  CHECK(call({}).code == 1);
  CHECK(call({"compat-check"}).code == 1);
  CHECK(call({"compat-check", "--config", data("compat_round.json"), "--grid", "2"}).code == 1);
  CHECK(call({"geodesics", "--round", "--start", "0,0,0,0"}).code == 1);
  CHECK(call({"geodesics", "--round", "--start", "0,0,1"}).code == 1);
  CHECK(call({"zoll-test", "--round", "--conic", data("diag123.json")}).code == 1);
  const auto io = call({"validate", "--seed", "3", "-o", "/nonexistent-dir/x.json"});
  CHECK(io.code == 1);
  CHECK(io.err.find("io-failure") != std::string::npos);
}

TEST_CASE("emit_curve row count and determinism", "[cli]") {
  const double h = 1e-3;
  // unit speed: the round metric is 4 delta at the origin of the north chart
  const PathSample path =
      integrate(round_sphere_field(), {ChartId::north, {0.0, 0.0}, {0.5, 0.0}, 0.0}, h, 2.0 * std::numbers::pi);
  std::ostringstream a, b;
  cli::emit_curve(path, cli::CurveFormat::csv, a);
  cli::emit_curve(path, cli::CurveFormat::csv, b);
  CHECK(a.str() == b.str());
  CHECK(count_lines(a.str()) == 1 + static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi / h)) + 1);
  CHECK(a.str().rfind("s,x,y,z,chart\n", 0) == 0);
  CHECK(norm(path.points.front().P - path.points.back().P) < kClosureTolerance);

  const auto r1 = call({"geodesics", "--conic", data("diag123.json"), "--start", "0.1,0.2,1,0", "--s-max", "1"});
  const auto r2 = call({"geodesics", "--conic", data("diag123.json"), "--start", "0.1,0.2,1,0", "--s-max", "1"});
  REQUIRE(r1.code == 0);
  CHECK(r1.out == r2.out);
  CHECK(count_lines(r1.out) == 1 + 1000 + 1);

  const auto js = call({"geodesics", "--round", "--start", "0,0,1,0", "--s-max", "0.1", "--emit", "json"});
  REQUIRE(js.code == 0);
  CHECK(json::parse(js.out)["points"].size() == 101);
}

TEST_CASE("emit_curve rejects an empty path", "[cli]") {
  std::ostringstream os;
  try {
    cli::emit_curve(PathSample{}, cli::CurveFormat::csv, os);
    FAIL("expected empty-path");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_path);
  }
}

TEST_CASE("zoll-test and finsler commands", "[cli]") {
  const auto z = call({"zoll-test", "--round", "--start", "0,0,0.3,0.4"});
  REQUIRE(z.code == 0);
  const auto zj = json::parse(z.out);
  CHECK(zj["closed"] == true);
  CHECK(std::abs(zj["s_return"].get<double>() - 2.0 * std::numbers::pi) < 1e-6);
  CHECK(zj["plane_residual"].get<double>() < 1e-6);

  const auto open = call({"zoll-test", "--field", data("bump_weyl.json"), "--start", "0,0,1,0", "--s-max", "5"});
  CHECK(open.code == 2);

  const auto inv = call({"finsler", "invariants", "--conic", data("offdiag.json"), "--samples", "30"});
  REQUIRE(inv.code == 0);
  const auto ij = json::parse(inv.out);
  CHECK(ij["positive"] == true);
  for (const auto& r : ij["eq_residuals"]) CHECK(r.get<double>() < 1e-4);

  const auto flow = call({"finsler", "flow", "--round", "--start", "0.3,0.1,1.0"});
  REQUIRE(flow.code == 0);
  CHECK(json::parse(flow.out)["period_error"].get<double>() < 1e-6);
}
