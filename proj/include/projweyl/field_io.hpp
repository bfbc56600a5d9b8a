#ifndef PROJWEYL_FIELD_IO_HPP
#define PROJWEYL_FIELD_IO_HPP

// JSON descriptions of factors, 1-forms, connections, conics and Weyl
// structures, as read by the command-line tool.
//
//   factor:      "flat" | "round" | "hyperbolic" | {"bump": a} | {"poly": [[c00, c01, ...], [c10, ...], ...]}
//   one-form:    "zero" | {"constant": [b1, b2]} | {"poly": [P1, P2]}
//   conic:       {"A": 3x3, "B": 3x3} (B optional) | {"upper": [A00 A01 A02 A11 A12 A22, B00 ... B22]}
//   connection:  {"kind": "levi-civita", "f": factor} | {"kind": "weyl", "f": factor, "beta": one-form}
//                | {"kind": "constant", "gamma": [[[G111, G112], [G121, G122]], [[...]]]}
//                | {"kind": "round-sphere"}, optionally with "epsilon": one-form
//   structure:   a conic, or {"f": factor, "beta": one-form, "chart": name}

#include <algorithm>
#include <array>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "projweyl/charts.hpp"
#include "projweyl/compatibility.hpp"
#include "projweyl/connection.hpp"
#include "projweyl/error.hpp"
#include "projweyl/fields.hpp"
#include "projweyl/flat_model.hpp"

namespace projweyl::io {

using json = nlohmann::json;

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::malformed_config, "'" + path + "': " + e.what());
  }
}

namespace detail {

[[noreturn]] inline void malformed(const std::string& what) { throw Error(ErrorCode::malformed_config, what); }

inline double number(const json& j, const std::string& what) {
  if (!j.is_number()) malformed(what + " must be a number");
  return j.get<double>();
}

inline std::vector<double> numbers(const json& j, const std::string& what) {
  if (!j.is_array()) malformed(what + " must be an array of numbers");
  std::vector<double> v;
  for (const auto& x : j) v.push_back(number(x, what));
  return v;
}

inline Polynomial polynomial(const json& j, const std::string& what) {
  if (!j.is_array()) malformed(what + " must be an array of coefficient rows");
  std::vector<std::vector<double>> c;
  for (const auto& row : j) c.push_back(numbers(row, what));
  return Polynomial(std::move(c));
}

inline Mat3<double> mat3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) malformed(what + " must be a 3x3 array");
  Mat3<double> m{};
  for (int i = 0; i < 3; ++i) {
    const auto row = numbers(j[i], what);
    if (row.size() != 3) malformed(what + " must be a 3x3 array");
    for (int k = 0; k < 3; ++k) m[i][k] = row[k];
  }
  return m;
}

}  // namespace detail

inline ScalarField parse_factor(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "flat") return flat_factor();
    if (s == "round") return round_factor();
    if (s == "hyperbolic") return hyperbolic_factor();
    detail::malformed("unknown factor '" + s + "'");
  }
  if (j.is_object() && j.contains("bump")) return bump_factor(detail::number(j["bump"], "bump amplitude"));
  if (j.is_object() && j.contains("poly")) return polynomial_factor(detail::polynomial(j["poly"], "factor polynomial"));
  detail::malformed("factor must be a name, {\"bump\": a} or {\"poly\": [...]}");
}

inline OneFormField parse_oneform(const json& j) {
  if (j.is_null() || (j.is_string() && j.get<std::string>() == "zero")) return zero_oneform();
  if (j.is_object() && j.contains("constant")) {
    const auto b = detail::numbers(j["constant"], "constant one-form");
    if (b.size() != 2) detail::malformed("constant one-form needs two components");
    return constant_oneform(b[0], b[1]);
  }
  if (j.is_object() && j.contains("poly")) {
    const auto& p = j["poly"];
    if (!p.is_array() || p.size() != 2) detail::malformed("polynomial one-form needs two polynomials");
    return polynomial_oneform(detail::polynomial(p[0], "one-form polynomial"), detail::polynomial(p[1], "one-form polynomial"));
  }
  detail::malformed("one-form must be \"zero\", {\"constant\": [...]} or {\"poly\": [P1, P2]}");
}

inline Conic parse_conic(const json& j) {
  if (!j.is_object()) detail::malformed("conic must be an object");
  if (j.contains("upper")) {
    const auto u = detail::numbers(j["upper"], "conic upper triangle");
    if (u.size() != 12) detail::malformed("conic upper triangle needs 12 numbers");
    std::array<double, 12> a{};
    std::copy(u.begin(), u.end(), a.begin());
    return Conic::from_upper(a);
  }
  if (!j.contains("A")) detail::malformed("conic needs \"A\" (and optionally \"B\") or \"upper\"");
  const Mat3<double> A = detail::mat3(j["A"], "conic A");
  const Mat3<double> B = j.contains("B") ? detail::mat3(j["B"], "conic B") : Mat3<double>{};
  return Conic(A, B);
}

inline bool is_conic(const json& j) { return j.is_object() && (j.contains("A") || j.contains("upper")); }

inline ChartId parse_chart(const json& j, ChartId fallback) {
  if (j.is_null()) return fallback;
  if (!j.is_string()) detail::malformed("chart must be a string");
  return chart_from_string(j.get<std::string>());
}

inline ConnectionField parse_connection(const json& j) {
  if (!j.is_object() || !j.contains("kind")) detail::malformed("connection needs a \"kind\"");
  const auto kind = j["kind"].get<std::string>();
  const ChartId chart = parse_chart(j.value("chart", json()), ChartId::planar);
  ConnectionField c = [&] {
    if (kind == "levi-civita") return levi_civita_field(conformal_metric(parse_factor(j.at("f"))), chart);
    if (kind == "weyl") return weyl_field(conformal_metric(parse_factor(j.at("f"))), parse_oneform(j.value("beta", json())), chart);
    if (kind == "round-sphere") return round_sphere_field();
    if (kind == "constant") {
      const auto& g = j.at("gamma");
      Christoffel<double> gamma{};
      if (!g.is_array() || g.size() != 2) detail::malformed("gamma must be a 2x2x2 array");
      for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) {
          const auto row = detail::numbers(g[i].at(k), "gamma");
          if (row.size() != 2) detail::malformed("gamma must be a 2x2x2 array");
          for (int l = 0; l < 2; ++l) gamma[i][k][l] = row[l];
        }
      return constant_connection(ConnectionCoeffs(gamma), chart);
    }
    detail::malformed("unknown connection kind '" + kind + "'");
  }();
  if (j.contains("epsilon")) c = epsilon_modified(c, parse_oneform(j["epsilon"]));
  return c;
}

/// A Weyl structure read from a conic or a conformal description.
struct Structure {
  std::string name;
  std::optional<ConicStructure> conic;
  std::optional<WeylStructureChart> conformal;

  ConnectionField connection() const {
    if (conic) return conic->connection();
    return weyl_field(conformal->metric(), conformal->beta, conformal->chart);
  }
};

inline Structure parse_structure(const json& j, const std::string& name) {
  Structure s;
  s.name = j.is_object() ? j.value("name", name) : name;
  if (is_conic(j)) {
    s.conic.emplace(parse_conic(j), s.name);
  } else if (j.is_object() && j.contains("f")) {
    s.conformal = WeylStructureChart::conformal(parse_factor(j["f"]), parse_oneform(j.value("beta", json())),
                                                parse_chart(j.value("chart", json()), ChartId::planar));
  } else {
    detail::malformed("structure must be a conic or {\"f\": ..., \"beta\": ...}");
  }
  return s;
}

}  // namespace projweyl::io

#endif  // PROJWEYL_FIELD_IO_HPP
