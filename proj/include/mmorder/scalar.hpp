#pragma once

// Shared glue for the two numeric modes. Exact mode (Rational) is the
// reference semantics for order decisions; float mode (double) carries
// simulator output and optimization results. Comparisons take a tolerance
// that is ignored in exact mode.

#include "mmorder/rational.hpp"

#include <cmath>
#include <string>

namespace mmorder {

inline constexpr double kDefaultTol = 1e-9;

template <class S>
struct scalar_traits;

template <>
struct scalar_traits<double> {
  static constexpr bool is_exact = false;
  static constexpr const char* mode_name = "float";
  static double to_double(double v) { return v; }
  static double from_int(long long v) { return static_cast<double>(v); }
};

template <>
struct scalar_traits<Rational> {
  static constexpr bool is_exact = true;
  static constexpr const char* mode_name = "exact";
  static double to_double(const Rational& v) { return v.to_double(); }
  static Rational from_int(long long v) { return Rational(v); }
};

inline bool tol_le(double a, double b, double tol) { return a <= b + tol; }
inline bool tol_le(const Rational& a, const Rational& b, double) { return a <= b; }

inline bool tol_eq(double a, double b, double tol) { return std::abs(a - b) <= tol; }
inline bool tol_eq(const Rational& a, const Rational& b, double) { return a == b; }

inline bool tol_lt(double a, double b, double tol) { return a < b - tol; }
inline bool tol_lt(const Rational& a, const Rational& b, double) { return a < b; }

inline double scalar_pow(double base, unsigned e) {
  return std::pow(base, static_cast<double>(e));
}
inline Rational scalar_pow(const Rational& base, unsigned e) { return Rational::pow(base, e); }

inline std::string scalar_to_string(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
inline std::string scalar_to_string(const Rational& v) { return v.to_string(); }

}  // namespace mmorder
