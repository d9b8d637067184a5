#include "vss/params.hpp"

#include <cmath>

namespace vss {

void ProblemParams::validate() const {
  if (m < 1) throw std::invalid_argument("params: m must be a positive integer");
  if (N < 1) throw std::invalid_argument("params: N must be a positive integer");
  if (!(p > 1.0)) throw std::invalid_argument("params: p must exceed 1");
  if (!(alpha > -1.0)) throw std::invalid_argument("params: alpha must exceed -1");
}

double beta(const ProblemParams& params) {
  params.validate();
  return (1.0 + params.alpha) / (params.p - 1.0);
}

DerivedExponents derive(const ProblemParams& params) {
  params.validate();
  DerivedExponents d{};
  d.beta = (1.0 + params.alpha) / (params.p - 1.0);
  d.p0 = 1.0 + 2.0 * params.m * (1.0 + params.alpha) / params.N;
  d.c1 = params.N * (d.p0 - params.p) / (2.0 * params.m * (params.p - 1.0));
  d.v_plus = std::pow(d.beta, 1.0 / (params.p - 1.0));
  d.decay_power = 2.0 * params.m / (2.0 * params.m - 1.0);
  return d;
}

double critical_p(int l, int m, int N, double alpha) {
  if (l < 0) throw std::invalid_argument("critical_p: l must be >= 0");
  return 1.0 + 2.0 * m * (1.0 + alpha) / (N + l);
}

double critical_alpha(int l, int m, int N, double p) {
  if (l < 0) throw std::invalid_argument("critical_alpha: l must be >= 0");
  if (!(p > 1.0)) throw std::invalid_argument("critical_alpha: p must exceed 1");
  return (p - 1.0) * (N + l) / (2.0 * m) - 1.0;
}

long count_basic_profiles(double alpha_max, Parity parity, int m, int N, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("count_basic_profiles: p must exceed 1");
  // alpha_l <= alpha_max  <=>  l <= 2m(1+alpha_max)/(p-1) - N
  const double l_star = 2.0 * m * (1.0 + alpha_max) / (p - 1.0) - N;
  const double guard = 1e-9 * std::max(1.0, std::abs(l_star));
  const long l_max = static_cast<long>(std::floor(l_star + guard));
  if (l_max < 0) return 0;
  const long first = (parity == Parity::Even) ? 0 : 1;
  if (l_max < first) return 0;
  return (l_max - first) / 2 + 1;
}

double gamma0(double p) {
  if (!(p > 1.0)) throw std::invalid_argument("gamma0: p must exceed 1");
  return (3.0 * p + 5.0) / (4.0 * (p + 1.0));
}

WkbjRates wkbj_rates(int m) {
  if (m != 2)
    throw std::invalid_argument("wkbj_rates: not implemented for m = " + std::to_string(m));
  WkbjRates r{};
  r.a0 = 0.75 * std::pow(4.0, -1.0 / 3.0);
  const double half_sqrt3 = std::sqrt(3.0) / 2.0;
  r.a_plus = r.a0 * std::complex<double>(-0.5, half_sqrt3);
  r.a_minus = r.a0 * std::complex<double>(-0.5, -half_sqrt3);
  return r;
}

double nonlinearity(double v, double p, Variant variant) {
  const double a = std::abs(v);
  if (a == 0.0) return 0.0;
  return variant == Variant::Monotone ? std::pow(a, p - 1.0) * v : std::pow(a, p);
}

double nonlinearity_derivative(double v, double p, Variant variant) {
  const double a = std::abs(v);
  if (a == 0.0) return 0.0;
  if (variant == Variant::Monotone) return p * std::pow(a, p - 1.0);
  // d/dv |v|^p = p |v|^{p-1} sgn(v)
  return p * std::pow(a, p - 1.0) * (v > 0 ? 1.0 : -1.0);
}

}  // namespace vss
