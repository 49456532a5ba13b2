#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <compare>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "tropicurve/error.hpp"

namespace tropicurve {

using Integer = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;

inline Integer num(const Rational& q) { return boost::multiprecision::numerator(q); }
inline Integer den(const Rational& q) { return boost::multiprecision::denominator(q); }

inline bool is_integer(const Rational& q) { return den(q) == 1; }

inline Integer floor_div(const Rational& q) {
  Integer n = num(q), d = den(q);
  Integer r = n / d;  // truncates toward zero
  if (r * d != n && n < 0) r -= 1;
  return r;
}

inline Integer ceil_div(const Rational& q) { return -floor_div(-q); }

inline Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

inline Integer gcd(Integer a, Integer b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    Integer t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline Integer lcm(const Integer& a, const Integer& b) {
  if (a == 0 || b == 0) return 0;
  Integer g = gcd(a, b);
  Integer r = a / g * b;
  return r < 0 ? Integer(-r) : r;
}

/// Parses "p/q" or "p" (optionally signed). Decimal points and zero denominators are rejected.
inline Rational parse_rational(std::string_view text) {
  auto bad = [&] { fail(ErrorCode::ParseError, "malformed rational \"" + std::string(text) + "\""); };
  auto parse_int = [&](std::string_view s, bool allow_sign) -> Integer {
    if (s.empty()) bad();
    std::size_t i = 0;
    if (allow_sign && (s[0] == '-' || s[0] == '+')) i = 1;
    if (i == s.size()) bad();
    for (std::size_t j = i; j < s.size(); ++j)
      if (s[j] < '0' || s[j] > '9') bad();
    if (s[0] == '+') s.remove_prefix(1);
    return Integer(std::string(s));
  };
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_int(text, true));
  Integer n = parse_int(text.substr(0, slash), true);
  Integer d = parse_int(text.substr(slash + 1), false);
  if (d == 0) bad();
  return Rational(n, d);
}

/// Canonical text: "p/q" in lowest terms, or "p" when the denominator is 1.
inline std::string format_rational(const Rational& q) {
  if (is_integer(q)) return num(q).str();
  return num(q).str() + "/" + den(q).str();
}

/// A point of the two-sided tropical line [-inf, +inf].
class ExtRational {
 public:
  enum class Kind : std::uint8_t { MinusInfinity = 0, Finite = 1, PlusInfinity = 2 };

  ExtRational() = default;
  ExtRational(Rational v) : kind_(Kind::Finite), value_(std::move(v)) {}
  static ExtRational plus_infinity() { return ExtRational(Kind::PlusInfinity); }
  static ExtRational minus_infinity() { return ExtRational(Kind::MinusInfinity); }

  Kind kind() const { return kind_; }
  bool finite() const { return kind_ == Kind::Finite; }
  const Rational& value() const { return value_; }

  friend bool operator==(const ExtRational& a, const ExtRational& b) {
    return a.kind_ == b.kind_ && (a.kind_ != Kind::Finite || a.value_ == b.value_);
  }
  friend std::strong_ordering operator<=>(const ExtRational& a, const ExtRational& b) {
    if (a.kind_ != b.kind_) return a.kind_ <=> b.kind_;
    if (a.kind_ != Kind::Finite || a.value_ == b.value_) return std::strong_ordering::equal;
    return a.value_ < b.value_ ? std::strong_ordering::less : std::strong_ordering::greater;
  }

 private:
  explicit ExtRational(Kind k) : kind_(k) {}
  Kind kind_ = Kind::Finite;
  Rational value_{0};
};

inline std::string format_ext(const ExtRational& x) {
  switch (x.kind()) {
    case ExtRational::Kind::PlusInfinity: return "+inf";
    case ExtRational::Kind::MinusInfinity: return "-inf";
    default: return format_rational(x.value());
  }
}

inline ExtRational parse_ext(std::string_view text) {
  if (text == "+inf" || text == "inf") return ExtRational::plus_infinity();
  if (text == "-inf") return ExtRational::minus_infinity();
  return ExtRational(parse_rational(text));
}

using IntVector = std::vector<Integer>;
using RatVector = std::vector<Rational>;

inline Integer content(const IntVector& v) {
  Integer g = 0;
  for (const auto& x : v) g = gcd(g, x);
  return g;
}

inline bool is_zero(const IntVector& v) {
  for (const auto& x : v)
    if (x != 0) return false;
  return true;
}

}  // namespace tropicurve
