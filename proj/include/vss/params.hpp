#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace vss {

/// Which absorption nonlinearity f(V) the equation carries.
enum class Variant { Monotone, NonMonotone };

/// Reflection symmetry imposed at the origin.
enum class Parity { Even, Odd };

/// Problem parameters of the 2m-th order diffusion-absorption model.
///
/// Constraints: m >= 1, N >= 1, p > 1, alpha > -1.  The similarity
/// exponent beta = (1+alpha)/(p-1) is then positive.
struct ProblemParams {
  int m = 2;
  int N = 1;
  double p = 2.0;
  double alpha = 0.0;
  Variant variant = Variant::Monotone;

  void validate() const;
};

/// Closed-form exponents derived from ProblemParams.
struct DerivedExponents {
  double beta;         ///< (1+alpha)/(p-1)
  double p0;           ///< 1 + 2m(1+alpha)/N, Fujita-like critical exponent
  double c1;           ///< N(p0-p)/(2m(p-1)), spectral shift
  double v_plus;       ///< beta^{1/(p-1)}, positive constant equilibrium
  double decay_power;  ///< 2m/(2m-1), stretched-exponential tail exponent
};

double beta(const ProblemParams& params);
DerivedExponents derive(const ProblemParams& params);

/// p_l = 1 + 2m(1+alpha)/(N+l): bifurcation exponent in p.
double critical_p(int l, int m, int N, double alpha);

/// alpha_l = (p-1)(N+l)/(2m) - 1: bifurcation exponent in alpha.
/// Exact inverse of critical_p at fixed (l, m, N).
double critical_alpha(int l, int m, int N, double p);

/// Number of l >= 0 with the given parity and alpha_l <= alpha_max.
long count_basic_profiles(double alpha_max, Parity parity, int m, int N, double p);

/// gamma_0 = (3p+5)/(4(p+1)); < 1 for all p > 1.
double gamma0(double p);

/// Far-field mode rates V ~ exp(a y^{4/3}) of the linearized profile ODE.
struct WkbjRates {
  double a0;                     ///< growing mode rate, (3/4) 4^{-1/3}
  std::complex<double> a_plus;   ///< a0 (-1/2 + i sqrt(3)/2)
  std::complex<double> a_minus;  ///< a0 (-1/2 - i sqrt(3)/2)
};

/// Only m = 2 is supported; other m throw std::invalid_argument.
WkbjRates wkbj_rates(int m);

/// Absorption term f(V): |V|^{p-1} V (Monotone) or |V|^p (NonMonotone).
double nonlinearity(double v, double p, Variant variant);

/// df/dV, used by linearization helpers.
double nonlinearity_derivative(double v, double p, Variant variant);

}  // namespace vss
