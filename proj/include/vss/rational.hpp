#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "vss/params.hpp"

namespace vss {

/// Exact rational arithmetic for the closed-form exponent tables.
/// Values such as p_2 = 11/3 or alpha_18 = 15/4 are exact fractions;
/// this path avoids asserting them through floating point.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n) : num(n), den(1) {}
  Rational(std::int64_t n, std::int64_t d);

  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  bool operator<(const Rational& o) const;
  bool operator<=(const Rational& o) const { return *this < o || *this == o; }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;  ///< "num/den", or "num" when den == 1

  /// Parses "a/b", integers, and plain decimals ("3.75" -> 15/4).
  static std::optional<Rational> parse(const std::string& text);
};

Rational critical_p_exact(int l, int m, int N, const Rational& alpha);
Rational critical_alpha_exact(int l, int m, int N, const Rational& p);
Rational beta_exact(const Rational& p, const Rational& alpha);
Rational c1_exact(int m, int N, const Rational& p, const Rational& alpha);
Rational gamma0_exact(const Rational& p);
long count_basic_profiles_exact(const Rational& alpha_max, Parity parity, int m, int N,
                                const Rational& p);

}  // namespace vss
