#include "vss/rational.hpp"

#include <cstdlib>
#include <numeric>
#include <stdexcept>

namespace vss {

namespace {

std::int64_t checked(__int128 v, const char* what) {
  if (v > INT64_MAX || v < INT64_MIN)
    throw std::overflow_error(std::string("rational overflow in ") + what);
  return static_cast<std::int64_t>(v);
}

}  // namespace

Rational::Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
  if (den == 0) throw std::invalid_argument("rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(std::abs(num), den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

Rational Rational::operator+(const Rational& o) const {
  return Rational(checked(static_cast<__int128>(num) * o.den + static_cast<__int128>(o.num) * den, "+"),
                  checked(static_cast<__int128>(den) * o.den, "+"));
}

Rational Rational::operator-(const Rational& o) const {
  return *this + Rational(-o.num, o.den);
}

Rational Rational::operator*(const Rational& o) const {
  return Rational(checked(static_cast<__int128>(num) * o.num, "*"),
                  checked(static_cast<__int128>(den) * o.den, "*"));
}

Rational Rational::operator/(const Rational& o) const {
  if (o.num == 0) throw std::invalid_argument("rational: division by zero");
  return Rational(checked(static_cast<__int128>(num) * o.den, "/"),
                  checked(static_cast<__int128>(den) * o.num, "/"));
}

bool Rational::operator<(const Rational& o) const {
  return static_cast<__int128>(num) * o.den < static_cast<__int128>(o.num) * den;
}

std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

std::optional<Rational> Rational::parse(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      const std::int64_t n = std::stoll(text.substr(0, slash));
      const std::int64_t d = std::stoll(text.substr(slash + 1));
      if (d == 0) return std::nullopt;
      return Rational(n, d);
    }
    const auto dot = text.find('.');
    if (dot == std::string::npos) return Rational(std::stoll(text));
    const std::string head = text.substr(0, dot);
    const std::string frac = text.substr(dot + 1);
    if (frac.size() > 15) return std::nullopt;
    std::int64_t scale = 1;
    for (size_t i = 0; i < frac.size(); ++i) scale *= 10;
    const bool negative = !head.empty() && head[0] == '-';
    const std::int64_t whole = head == "-" || head.empty() ? 0 : std::stoll(head);
    const std::int64_t part = frac.empty() ? 0 : std::stoll(frac);
    const std::int64_t n = whole * scale + (negative ? -part : (whole < 0 ? -part : part));
    return Rational(n, scale);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

Rational critical_p_exact(int l, int m, int N, const Rational& alpha) {
  if (l < 0) throw std::invalid_argument("critical_p_exact: l must be >= 0");
  return Rational(1) + Rational(2 * m) * (Rational(1) + alpha) / Rational(N + l);
}

Rational critical_alpha_exact(int l, int m, int N, const Rational& p) {
  if (l < 0) throw std::invalid_argument("critical_alpha_exact: l must be >= 0");
  return (p - Rational(1)) * Rational(N + l) / Rational(2 * m) - Rational(1);
}

Rational beta_exact(const Rational& p, const Rational& alpha) {
  return (Rational(1) + alpha) / (p - Rational(1));
}

Rational c1_exact(int m, int N, const Rational& p, const Rational& alpha) {
  const Rational p0 = critical_p_exact(0, m, N, alpha);
  return Rational(N) * (p0 - p) / (Rational(2 * m) * (p - Rational(1)));
}

Rational gamma0_exact(const Rational& p) {
  return (Rational(3) * p + Rational(5)) / (Rational(4) * (p + Rational(1)));
}

long count_basic_profiles_exact(const Rational& alpha_max, Parity parity, int m, int N,
                                const Rational& p) {
  long count = 0;
  const long first = (parity == Parity::Even) ? 0 : 1;
  for (long l = first;; l += 2) {
    const Rational al = critical_alpha_exact(static_cast<int>(l), m, N, p);
    if (!(al <= alpha_max)) break;
    ++count;
  }
  return count;
}

}  // namespace vss
