#pragma once

#include <map>
#include <memory>
#include <vector>

#include "vss/params.hpp"

namespace vss {

/// Gauss-Legendre panel quadrature for the inverse Fourier integral of
/// exp(-xi^{2m}).
struct QuadratureSpec {
  double xi_cutoff = 0.0;   ///< 0 means "derive from m"
  int panels = 8;
  int nodes_per_panel = 64;
};

/// Cutoff with exp(-cutoff^{2m}) < 1e-18.
double default_xi_cutoff(int m);

/// F^{(l)}(y) = (1/pi) int_0^inf xi^l cos(y xi + l pi/2) exp(-xi^{2m}) dxi.
double kernel_derivative(double y, int l, int m, const QuadratureSpec& quad = {});

/// Sampled kernel F and its derivatives on a symmetric uniform grid.
///
/// The half-width must be large enough that polynomial-weighted pairings
/// up to l_max are converged; suggest_half_width picks that from the
/// measured tail rate.
class KernelTable {
 public:
  static KernelTable build(int m, int l_max, double half_width = 0.0, double step = 0.01,
                           const QuadratureSpec& quad = {});
  static double suggest_half_width(int m, int l_max);

  int m() const { return m_; }
  int l_max() const { return l_max_; }
  double step() const { return step_; }
  const std::vector<double>& grid() const { return grid_; }
  const QuadratureSpec& quadrature() const { return quad_; }

  /// F^{(l)} sampled over grid().
  const std::vector<double>& derivative_row(int l) const;
  /// Eigenfunction psi_l = (-1)^l F^{(l)} / sqrt(l!) sampled over grid().
  std::vector<double> eigenfunction(int l) const;

  /// Trapezoid integral of a grid-sampled function.
  double integrate_grid(const std::vector<double>& values) const;

 private:
  int m_ = 0;
  int l_max_ = 0;
  double step_ = 0.0;
  QuadratureSpec quad_;
  std::vector<double> grid_;
  std::vector<std::vector<double>> rows_;
};

/// Polynomial eigenfunction of the adjoint operator, monomial coefficients.
struct AdjointPolynomial {
  int l = 0;
  std::vector<double> coefficients;  ///< coefficients[k] multiplies y^k

  double eval(double y) const;
  /// d^j/dy^j at a point.
  double derivative(double y, int j) const;
};

AdjointPolynomial adjoint_poly(int l, int m);

/// <psi_beta, psi*_gamma>, trapezoid on the kernel grid.
double pairing(int beta_idx, int gamma_idx, const KernelTable& kernel);

/// kappa_l(p) = <f(psi_l), psi*_l> with f the absorption nonlinearity;
/// the Monotone variant is the classical <|psi_l|^{p-1} psi_l, psi*_l>.
double kappa(int l, double p, const KernelTable& kernel, Variant variant = Variant::Monotone);

/// c_hat_l = (N+l)^2 / (4 m^2 (1+alpha) kappa_l).  Negative kappa flips the
/// local branch to the supercritical side of p_l; the caller inspects the sign.
double c_hat(int l, double p, double alpha, int m, int N, double kappa_val);

/// Perturbation eigenvalue of the linearized operator at the first
/// bifurcation; equals -N/(2m) independently of alpha.
double mu0(int m, int N, double alpha, const KernelTable& kernel);

struct SpectralSummary {
  int m = 0;
  int N = 0;
  double p = 0.0;
  double alpha = 0.0;
  std::vector<double> lambda;               ///< lambda_l = -l/(2m)
  std::map<int, double> kappa_values;
  std::map<int, double> c_hat_values;
  std::vector<std::vector<double>> ortho;   ///< pairing matrix
  double mu0_value = 0.0;
};

SpectralSummary build_summary(int m, int N, double p, double alpha, int l_max,
                              const KernelTable& kernel);

/// Memoized shared table; concurrent callers get the same immutable object.
std::shared_ptr<const KernelTable> shared_kernel(int m, int l_max);

}  // namespace vss
