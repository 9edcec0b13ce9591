#pragma once

// JSON space files:
//
//   { "mode": "exact" | "float",
//     "points": [ { "label": "a", "mass": "1/2" }, ... ],
//     "dist": [ [ ... ], ... ] }
//
// The distance matrix is the full symmetric form, row-major. Exact mode
// carries rationals as "p/q" strings (plain integers also accepted); float
// mode carries JSON numbers at full precision. The reader validates the
// schema and, by default, the mm-space axioms.

#include "mmorder/mm_space.hpp"

#include "json.hpp"

#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>

namespace mmorder {

using AnySpace = std::variant<MmSpaceQ, MmSpaceD>;

struct SpaceIoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline Rational exact_entry(const nlohmann::json& j, const std::string& where) {
  if (j.is_string()) {
    try {
      return Rational::parse(j.get<std::string>());
    } catch (const std::exception& e) {
      throw SpaceIoError(where + ": bad rational literal: " + e.what());
    }
  }
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_number_float())
    throw SpaceIoError(where + ": decimal literal in exact mode (use \"p/q\" or float mode)");
  throw SpaceIoError(where + ": expected a rational");
}

inline double float_entry(const nlohmann::json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string())
    throw SpaceIoError(where + ": string literal in float mode (use exact mode for rationals)");
  throw SpaceIoError(where + ": expected a number");
}

inline void reject_unknown_fields(const nlohmann::json& j,
                                  std::initializer_list<const char*> known,
                                  const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw SpaceIoError(where + ": unknown field \"" + it.key() + "\"");
  }
}

template <class S, class EntryFn>
MmSpace<S> space_from_json_impl(const nlohmann::json& j, EntryFn entry) {
  MmSpace<S> x;
  const auto& points = j.at("points");
  if (!points.is_array()) throw SpaceIoError("points: expected an array");
  const auto n = static_cast<Eigen::Index>(points.size());
  x.mass.resize(n);
  x.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = points[i];
    std::string where = "points[" + std::to_string(i) + "]";
    if (!p.is_object()) throw SpaceIoError(where + ": expected an object");
    reject_unknown_fields(p, {"label", "mass"}, where);
    if (!p.contains("label") || !p.at("label").is_string())
      throw SpaceIoError(where + ": missing string label");
    x.labels[i] = p.at("label").get<std::string>();
    if (!p.contains("mass")) throw SpaceIoError(where + ": missing mass");
    x.mass(i) = entry(p.at("mass"), where + ".mass");
  }
  const auto& dist = j.at("dist");
  if (!dist.is_array() || static_cast<Eigen::Index>(dist.size()) != n)
    throw SpaceIoError("dist: expected " + std::to_string(n) + " rows");
  x.dist.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = dist[i];
    std::string where = "dist[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      throw SpaceIoError(where + ": expected " + std::to_string(n) + " entries");
    for (Eigen::Index k = 0; k < n; ++k)
      x.dist(i, k) = entry(row[k], where + "[" + std::to_string(k) + "]");
  }
  return x;
}

}  // namespace detail

inline AnySpace space_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SpaceIoError("space: expected an object");
  detail::reject_unknown_fields(j, {"mode", "points", "dist"}, "space");
  if (!j.contains("mode") || !j.at("mode").is_string())
    throw SpaceIoError("space: missing mode (\"exact\" or \"float\")");
  std::string mode = j.at("mode").get<std::string>();
  if (!j.contains("points") || !j.contains("dist"))
    throw SpaceIoError("space: missing points or dist");
  if (mode == "exact")
    return detail::space_from_json_impl<Rational>(j, detail::exact_entry);
  if (mode == "float")
    return detail::space_from_json_impl<double>(j, detail::float_entry);
  throw SpaceIoError("space: mode must be \"exact\" or \"float\"");
}

inline nlohmann::json space_to_json(const MmSpaceQ& x) {
  nlohmann::json j;
  j["mode"] = "exact";
  j["points"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i)
    j["points"].push_back({{"label", x.labels[i]}, {"mass", x.mass(i).to_string()}});
  j["dist"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < x.size(); ++k) row.push_back(x.dist(i, k).to_string());
    j["dist"].push_back(std::move(row));
  }
  return j;
}

inline nlohmann::json space_to_json(const MmSpaceD& x) {
  nlohmann::json j;
  j["mode"] = "float";
  j["points"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i)
    j["points"].push_back({{"label", x.labels[i]}, {"mass", x.mass(i)}});
  j["dist"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < x.size(); ++k) row.push_back(x.dist(i, k));
    j["dist"].push_back(std::move(row));
  }
  return j;
}

inline nlohmann::json space_to_json(const AnySpace& s) {
  return std::visit([](const auto& x) { return space_to_json(x); }, s);
}

// Reads a space file; with check_axioms set, invalid spaces are rejected with
// the full validation report in the message.
inline AnySpace read_space(const std::string& path, bool check_axioms = true) {
  std::ifstream in(path);
  if (!in) throw SpaceIoError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SpaceIoError(path + ": " + e.what());
  }
  AnySpace s = space_from_json(j);
  if (check_axioms) {
    auto rep = std::visit([](const auto& x) { return validate(x); }, s);
    if (!rep.valid()) throw SpaceIoError(path + ": invalid mm space: " + rep.summary());
  }
  return s;
}

inline void write_space(const AnySpace& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SpaceIoError("cannot write " + path);
  out << space_to_json(s).dump(2) << "\n";
}

}  // namespace mmorder
