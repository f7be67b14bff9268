#pragma once

// Exact arithmetic primitives. Counts are arbitrary-precision integers and
// every statistic derived from them is an exact rational; doubles only appear
// at the display boundary or in the floating solver path.

#include <gti/error.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <concepts>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>

namespace gti {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

template <class T>
concept Scalar = std::same_as<T, double> || std::same_as<T, Rational>;

inline BigInt numerator_of(const Rational &r) { return boost::multiprecision::numerator(r); }
inline BigInt denominator_of(const Rational &r) { return boost::multiprecision::denominator(r); }

inline bool is_integral(const Rational &r) { return denominator_of(r) == 1; }

inline double to_double(double x) { return x; }
inline double to_double(const Rational &r) { return r.convert_to<double>(); }
inline double to_double(const BigInt &i) { return i.convert_to<double>(); }

/// Integer square root when `n` is a perfect square.
inline std::optional<BigInt> exact_isqrt(const BigInt &n) {
  if (n < 0)
    return std::nullopt;
  BigInt s = boost::multiprecision::sqrt(n);
  if (s * s != n)
    return std::nullopt;
  return s;
}

/// Square root of a rational in lowest terms: defined only when numerator and
/// denominator are both perfect squares.
inline std::optional<Rational> exact_sqrt(const Rational &r) {
  auto num = exact_isqrt(numerator_of(r));
  if (!num)
    return std::nullopt;
  auto den = exact_isqrt(denominator_of(r));
  if (!den)
    return std::nullopt;
  return Rational(*num, *den);
}

/// "p/q", or "p" when the value is an integer.
inline std::string to_fraction_string(const Rational &r) {
  if (is_integral(r))
    return numerator_of(r).str();
  return numerator_of(r).str() + "/" + denominator_of(r).str();
}

inline BigInt parse_bigint(std::string_view text) {
  std::string_view digits = text;
  if (!digits.empty() && (digits.front() == '-' || digits.front() == '+'))
    digits.remove_prefix(1);
  if (digits.empty())
    throw ParseError("empty integer literal");
  for (char c : digits)
    if (c < '0' || c > '9')
      throw ParseError("invalid integer literal '" + std::string(text) + "'");
  while (digits.size() > 1 && digits.front() == '0')
    digits.remove_prefix(1); // cpp_int reads a leading zero as octal
  BigInt v{std::string(digits)};
  return text.front() == '-' ? BigInt(-v) : v;
}

/// Parses "p/q", an integer, or a decimal literal such as "0.125" or "-3.5e-2".
/// Decimals are converted exactly: "0.1" is 1/10, not the nearest double.
inline Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    text.remove_suffix(1);
  if (text.empty())
    throw ParseError("empty numeric literal");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    BigInt num = parse_bigint(text.substr(0, slash));
    BigInt den = parse_bigint(text.substr(slash + 1));
    if (den == 0)
      throw ParseError("zero denominator in '" + std::string(text) + "'");
    return Rational(num, den);
  }

  bool negative = false;
  std::string_view body = text;
  if (body.front() == '-' || body.front() == '+') {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = body.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_text = body.substr(e + 1);
    if (!exp_text.empty() && exp_text.front() == '+')
      exp_text.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(exp_text.data(), exp_text.data() + exp_text.size(), exponent);
    if (ec != std::errc{} || ptr != exp_text.data() + exp_text.size())
      throw ParseError("invalid exponent in '" + std::string(text) + "'");
    body = body.substr(0, e);
  }
  std::string digits;
  bool seen_point = false;
  for (char c : body) {
    if (c == '.' && !seen_point) {
      seen_point = true;
    } else if (c >= '0' && c <= '9') {
      digits.push_back(c);
      if (seen_point)
        --exponent;
    } else {
      throw ParseError("invalid numeric literal '" + std::string(text) + "'");
    }
  }
  if (digits.empty())
    throw ParseError("invalid numeric literal '" + std::string(text) + "'");
  Rational value{parse_bigint(digits)};
  BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::labs(exponent)));
  value = exponent >= 0 ? Rational(value * scale) : Rational(value / scale);
  return negative ? Rational(-value) : value;
}

/// Exact rational equal to the shortest round-trip decimal form of `x`.
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x))
    throw ParseError("non-finite number");
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return parse_rational(std::string_view(buf, static_cast<std::size_t>(ptr - buf)));
}

/// Decimal rendering with `digits` significant digits.
inline std::string format_decimal(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

template <Scalar T>
T from_rational(const Rational &r) {
  if constexpr (std::same_as<T, double>)
    return to_double(r);
  else
    return r;
}

template <Scalar T>
T abs_value(const T &x) {
  return x < 0 ? T(-x) : x;
}

} // namespace gti
