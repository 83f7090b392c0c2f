#ifndef NEURACRYPT_RATIONAL_HPP
#define NEURACRYPT_RATIONAL_HPP

#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "neuracrypt/errors.hpp"

namespace neuracrypt {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return static_cast<double>(r); }

// "1/3" for non-integers, "2" for integers.
inline std::string rational_to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

// Accepts "3", "-3", "1/3", "0.25", "2.5e-3". Exact decimal/fraction parse;
// this is how instance files carry probabilities without binary rounding.
inline Rational parse_rational(const std::string& text) {
  const std::string trimmed = [&] {
    size_t b = 0, e = text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    return text.substr(b, e - b);
  }();
  if (trimmed.empty()) fail(errc::format_error, "empty rational literal");

  const auto slash = trimmed.find('/');
  if (slash != std::string::npos) {
    const std::string num = trimmed.substr(0, slash);
    const std::string den = trimmed.substr(slash + 1);
    if (num.empty() || den.empty()) fail(errc::format_error, "bad fraction '" + trimmed + "'");
    try {
      BigInt n(num), d(den);
      if (d == 0) fail(errc::format_error, "zero denominator in '" + trimmed + "'");
      return Rational(n, d);
    } catch (const std::exception&) {
      fail(errc::format_error, "bad fraction '" + trimmed + "'");
    }
  }

  // Decimal with optional exponent.
  size_t pos = 0;
  bool negative = false;
  if (pos < trimmed.size() && (trimmed[pos] == '+' || trimmed[pos] == '-')) {
    negative = trimmed[pos] == '-';
    ++pos;
  }
  std::string digits;
  std::int64_t frac_digits = 0;
  bool seen_dot = false, seen_digit = false;
  for (; pos < trimmed.size(); ++pos) {
    const char c = trimmed[pos];
    if (c == '.') {
      if (seen_dot) fail(errc::format_error, "bad decimal '" + trimmed + "'");
      seen_dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      seen_digit = true;
      if (seen_dot) ++frac_digits;
    } else if (c == 'e' || c == 'E') {
      break;
    } else {
      fail(errc::format_error, "bad decimal '" + trimmed + "'");
    }
  }
  if (!seen_digit) fail(errc::format_error, "bad decimal '" + trimmed + "'");
  std::int64_t exponent = 0;
  if (pos < trimmed.size()) {
    try {
      exponent = std::stoll(trimmed.substr(pos + 1));
    } catch (const std::exception&) {
      fail(errc::format_error, "bad exponent in '" + trimmed + "'");
    }
  }
  BigInt mantissa(digits.empty() ? "0" : digits);
  if (negative) mantissa = -mantissa;
  const std::int64_t net = exponent - frac_digits;
  BigInt num = mantissa, den = 1;
  if (net >= 0) {
    for (std::int64_t i = 0; i < net; ++i) num *= 10;
  } else {
    for (std::int64_t i = 0; i < -net; ++i) den *= 10;
  }
  return Rational(num, den);
}

// Exact conversion of an IEEE double (finite) to its rational value.
inline Rational rational_from_double(double v) {
  if (!std::isfinite(v)) fail(errc::format_error, "non-finite weight");
  if (v == 0.0) return Rational(0);
  int exp = 0;
  const double m = std::frexp(v, &exp);  // v = m * 2^exp, |m| in [0.5, 1)
  const auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
  Rational r(mant);
  const int shift = exp - 53;
  BigInt two = 1;
  for (int i = 0; i < std::abs(shift); ++i) two *= 2;
  if (shift >= 0) return r * Rational(two);
  return r / Rational(two);
}

}  // namespace neuracrypt

#endif
