#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

#include "bcast/error.hpp"

namespace bcast {

using Rational = mpq_class;

/// Parses "7", "3/4" or "-1/2". Whitespace around the tokens is allowed.
inline Rational parse_rational(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
  };
  auto is_int = [](std::string_view s) {
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
    if (s.empty()) return false;
    for (char c : s)
      if (c < '0' || c > '9') return false;
    return true;
  };
  text = trim(text);
  auto slash = text.find('/');
  std::string_view num = trim(text.substr(0, slash));
  std::string_view den = slash == std::string_view::npos ? "1" : trim(text.substr(slash + 1));
  if (!is_int(num) || !is_int(den))
    throw Error(ErrorCode::ParseError, "not a rational: '" + std::string(text) + "'");
  if (num.front() == '+') num.remove_prefix(1);
  if (den.front() == '+') den.remove_prefix(1);
  mpz_class n(std::string(num), 10);
  mpz_class d(std::string(den), 10);
  if (d == 0) throw Error(ErrorCode::ParseError, "zero denominator: '" + std::string(text) + "'");
  Rational r(n, d);
  r.canonicalize();
  return r;
}

/// Always "num/den", including integers ("1/1").
inline std::string to_fraction_string(const Rational& value) {
  return value.get_num().get_str() + "/" + value.get_den().get_str();
}

inline bool is_integer(const Rational& value) { return value.get_den() == 1; }

inline std::int64_t to_int64(const Rational& value) {
  if (!is_integer(value) || !value.get_num().fits_slong_p())
    throw Error(ErrorCode::InvalidArgument,
                "expected an integer, got " + to_fraction_string(value));
  return value.get_num().get_si();
}

}  // namespace bcast
