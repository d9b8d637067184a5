#include "vss/spectral.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace vss {

namespace {

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
void gauss_legendre_fresh(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(static_cast<size_t>(n));
  weights.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[static_cast<size_t>(i)] = x;
    weights[static_cast<size_t>(i)] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  static std::mutex mutex;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& entry = cache[n];
  if (entry.first.empty()) gauss_legendre_fresh(n, entry.first, entry.second);
  nodes = entry.first;
  weights = entry.second;
}

struct PanelRule {
  std::vector<double> xi;
  std::vector<double> w;
};

PanelRule panel_rule(int m, const QuadratureSpec& quad) {
  const double cutoff = quad.xi_cutoff > 0.0 ? quad.xi_cutoff : default_xi_cutoff(m);
  if (std::exp(-std::pow(cutoff, 2.0 * m)) > 1e-12)
    throw std::invalid_argument("kernel quadrature: xi_cutoff too small for the tail bound");
  std::vector<double> gl_x, gl_w;
  gauss_legendre(quad.nodes_per_panel, gl_x, gl_w);
  PanelRule rule;
  const double hp = cutoff / quad.panels;
  for (int pnl = 0; pnl < quad.panels; ++pnl) {
    const double a = pnl * hp, b = a + hp;
    for (int i = 0; i < quad.nodes_per_panel; ++i) {
      rule.xi.push_back(0.5 * (a + b) + 0.5 * (b - a) * gl_x[static_cast<size_t>(i)]);
      rule.w.push_back(0.5 * (b - a) * gl_w[static_cast<size_t>(i)]);
    }
  }
  return rule;
}

double factorial_sqrt_inv(int l) { return std::exp(-0.5 * std::lgamma(l + 1.0)); }

}  // namespace

double default_xi_cutoff(int m) {
  // exp(-c^{2m}) = 1e-18
  return std::pow(18.0 * std::numbers::ln10, 1.0 / (2.0 * m));
}

double kernel_derivative(double y, int l, int m, const QuadratureSpec& quad) {
  if (l < 0) throw std::invalid_argument("kernel_derivative: l must be >= 0");
  if (m < 1) throw std::invalid_argument("kernel_derivative: m must be >= 1");
  const PanelRule rule = panel_rule(m, quad);
  const double phase = l * std::numbers::pi / 2.0;
  double acc = 0.0;
  for (size_t i = 0; i < rule.xi.size(); ++i) {
    const double xi = rule.xi[i];
    acc += rule.w[i] * std::pow(xi, l) * std::cos(y * xi + phase) *
           std::exp(-std::pow(xi, 2.0 * m));
  }
  return acc / std::numbers::pi;
}

double KernelTable::suggest_half_width(int m, int l_max) {
  if (m == 1) return 16.0;
  // Measure the envelope decay rate from two envelope samples, then grow Y
  // until exp(-2 d Y^g) Y^{2 l_max} is negligible.
  const double g = 2.0 * m / (2.0 * m - 1.0);
  const double y1 = 6.0, y2 = 12.0;
  double e1 = 0.0, e2 = 0.0;
  for (double dy = 0.0; dy < 2.0; dy += 0.1) {
    e1 = std::max(e1, std::abs(kernel_derivative(y1 + dy, 0, m)));
    e2 = std::max(e2, std::abs(kernel_derivative(y2 + dy, 0, m)));
  }
  double d = std::log(e1 / e2) / (std::pow(y2, g) - std::pow(y1, g));
  d = std::max(d, 0.02);
  double y = 16.0;
  while (y < 400.0 && 2.0 * d * std::pow(y, g) - 2.0 * l_max * std::log(y) < 55.0) y += 4.0;
  return y;
}

KernelTable KernelTable::build(int m, int l_max, double half_width, double step,
                               const QuadratureSpec& quad) {
  if (l_max < 0) throw std::invalid_argument("KernelTable: l_max must be >= 0");
  KernelTable table;
  table.m_ = m;
  table.l_max_ = l_max;
  table.step_ = step;
  table.quad_ = quad;
  const double width = half_width > 0.0 ? half_width : suggest_half_width(m, l_max);
  const long half_n = std::lround(width / step);
  const long n = 2 * half_n + 1;
  table.grid_.resize(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) table.grid_[static_cast<size_t>(i)] = (i - half_n) * step;

  const PanelRule rule = panel_rule(m, quad);
  table.rows_.assign(static_cast<size_t>(l_max + 1), std::vector<double>(static_cast<size_t>(n)));
  // evaluate on y >= 0 and mirror with F^{(l)}(-y) = (-1)^l F^{(l)}(y)
  std::vector<double> weight(rule.xi.size());
  for (int l = 0; l <= l_max; ++l) {
    for (size_t i = 0; i < rule.xi.size(); ++i)
      weight[i] = rule.w[i] * std::pow(rule.xi[i], l) * std::exp(-std::pow(rule.xi[i], 2.0 * m));
    const double phase = l * std::numbers::pi / 2.0;
    auto& row = table.rows_[static_cast<size_t>(l)];
    for (long k = 0; k <= half_n; ++k) {
      const double y = k * step;
      double acc = 0.0;
      for (size_t i = 0; i < rule.xi.size(); ++i)
        acc += weight[i] * std::cos(y * rule.xi[i] + phase);
      acc /= std::numbers::pi;
      row[static_cast<size_t>(half_n + k)] = acc;
      row[static_cast<size_t>(half_n - k)] = (l % 2 == 0) ? acc : -acc;
    }
  }
  return table;
}

const std::vector<double>& KernelTable::derivative_row(int l) const {
  if (l < 0 || l > l_max_) throw std::out_of_range("KernelTable: derivative order out of range");
  return rows_[static_cast<size_t>(l)];
}

std::vector<double> KernelTable::eigenfunction(int l) const {
  std::vector<double> psi = derivative_row(l);
  const double scale = ((l % 2 == 0) ? 1.0 : -1.0) * factorial_sqrt_inv(l);
  for (double& v : psi) v *= scale;
  return psi;
}

double KernelTable::integrate_grid(const std::vector<double>& values) const {
  if (values.size() != grid_.size())
    throw std::invalid_argument("KernelTable: grid size mismatch");
  double acc = 0.0;
  for (size_t i = 0; i + 1 < values.size(); ++i) acc += values[i] + values[i + 1];
  return 0.5 * step_ * acc;
}

double AdjointPolynomial::eval(double y) const {
  double acc = 0.0;
  for (size_t k = coefficients.size(); k-- > 0;) acc = acc * y + coefficients[k];
  return acc;
}

double AdjointPolynomial::derivative(double y, int j) const {
  if (j == 0) return eval(y);
  if (static_cast<size_t>(j) >= coefficients.size()) return 0.0;
  double acc = 0.0;
  for (size_t k = coefficients.size(); k-- > static_cast<size_t>(j);) {
    double c = coefficients[k];
    for (int i = 0; i < j; ++i) c *= static_cast<double>(k - static_cast<size_t>(i));
    acc = acc * y + c;
  }
  return acc;
}

AdjointPolynomial adjoint_poly(int l, int m) {
  if (l < 0) throw std::invalid_argument("adjoint_poly: l must be >= 0");
  AdjointPolynomial poly;
  poly.l = l;
  poly.coefficients.assign(static_cast<size_t>(l + 1), 0.0);
  const double norm = factorial_sqrt_inv(l);
  poly.coefficients[static_cast<size_t>(l)] = norm;
  // (1/j!) (-Delta)^{mj} y^l in 1D: (-1)^{mj} d^{2mj}/dy^{2mj}
  for (int j = 1; 2 * m * j <= l; ++j) {
    const int drop = 2 * m * j;
    double coeff = (m * j) % 2 == 0 ? 1.0 : -1.0;
    for (int i = 1; i <= j; ++i) coeff /= i;           // 1/j!
    for (int i = 0; i < drop; ++i) coeff *= (l - i);   // falling factorial
    poly.coefficients[static_cast<size_t>(l - drop)] += norm * coeff;
  }
  return poly;
}

double pairing(int beta_idx, int gamma_idx, const KernelTable& kernel) {
  const std::vector<double> psi = kernel.eigenfunction(beta_idx);
  const AdjointPolynomial poly = adjoint_poly(gamma_idx, kernel.m());
  std::vector<double> f(psi.size());
  const auto& grid = kernel.grid();
  for (size_t i = 0; i < psi.size(); ++i) f[i] = psi[i] * poly.eval(grid[i]);
  return kernel.integrate_grid(f);
}

double kappa(int l, double p, const KernelTable& kernel, Variant variant) {
  if (!(p > 1.0)) throw std::invalid_argument("kappa: p must exceed 1");
  const std::vector<double> psi = kernel.eigenfunction(l);
  const AdjointPolynomial poly = adjoint_poly(l, kernel.m());
  std::vector<double> f(psi.size());
  const auto& grid = kernel.grid();
  for (size_t i = 0; i < psi.size(); ++i)
    f[i] = nonlinearity(psi[i], p, variant) * poly.eval(grid[i]);
  return kernel.integrate_grid(f);
}

double c_hat(int l, double p, double alpha, int m, int N, double kappa_val) {
  if (kappa_val == 0.0) throw std::domain_error("c_hat: kappa vanishes");
  const double nl = static_cast<double>(N + l);
  return nl * nl / (4.0 * m * m * (1.0 + alpha) * kappa_val);
}

double mu0(int m, int N, double alpha, const KernelTable& kernel) {
  if (N != 1) throw std::invalid_argument("mu0: implemented for N = 1 sampling only");
  const double q = 2.0 * m * (1.0 + alpha) / N;   // p0 - 1
  const double p0 = 1.0 + q;
  const double kappa0 = kappa(0, p0, kernel);
  if (!(kappa0 > 0.0)) throw std::domain_error("mu0: kappa_0 must be positive");

  // Independent route: Simpson on a staggered grid with direct kernel
  // evaluations, so the two integrals do not share quadrature error.
  const double width = kernel.grid().back();
  const int n = 2 * static_cast<int>(width / 0.0125) + 2;  // even interval count
  const double h = 2.0 * width / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double y = -width + i * h;
    const double F = kernel_derivative(std::abs(y), 0, m, kernel.quadrature());
    const double g = (1.0 - (p0 / kappa0) * std::pow(std::abs(F), q)) * F;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * g;
  }
  acc *= h / 3.0;
  return N * N / (4.0 * m * m * (1.0 + alpha)) * acc;
}

SpectralSummary build_summary(int m, int N, double p, double alpha, int l_max,
                              const KernelTable& kernel) {
  SpectralSummary s;
  s.m = m;
  s.N = N;
  s.p = p;
  s.alpha = alpha;
  for (int l = 0; l <= l_max; ++l) {
    s.lambda.push_back(-l / (2.0 * m));
    const double k = kappa(l, p, kernel);
    s.kappa_values[l] = k;
    s.c_hat_values[l] = (k == 0.0) ? std::numeric_limits<double>::quiet_NaN()
                                   : c_hat(l, p, alpha, m, N, k);
  }
  s.ortho.assign(static_cast<size_t>(l_max + 1),
                 std::vector<double>(static_cast<size_t>(l_max + 1), 0.0));
  for (int b = 0; b <= l_max; ++b)
    for (int g = 0; g <= l_max; ++g)
      s.ortho[static_cast<size_t>(b)][static_cast<size_t>(g)] = pairing(b, g, kernel);
  s.mu0_value = (N == 1) ? mu0(m, N, alpha, kernel) : 0.0;
  return s;
}

std::shared_ptr<const KernelTable> shared_kernel(int m, int l_max) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const KernelTable>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& entry = cache[{m, l_max}];
  if (!entry) entry = std::make_shared<KernelTable>(KernelTable::build(m, l_max));
  return entry;
}

}  // namespace vss
