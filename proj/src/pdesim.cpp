#include "vss/pdesim.hpp"

#include <cmath>
#include <stdexcept>

#include "vss/linalg.hpp"
#include "vss/spectral.hpp"

namespace vss {

void PdeGrid::validate() const {
  if (n < 256) throw std::invalid_argument("pde grid: n must be at least 256");
  if (!(half_width > 0.0) || !(dt0 > 0.0)) throw std::invalid_argument("pde grid: bad sizes");
}

namespace {

struct PentaBands {
  std::vector<double> a, b, c, d, e;  // sub-sub, sub, diag, super, super-super
};

/// I + dt D4 with the boundary closure baked into the first/last rows.
PentaBands implicit_matrix(double dt, const PdeGrid& grid) {
  const int n = grid.n;
  const double k = dt / std::pow(grid.dx(), 4);
  PentaBands m;
  m.a.assign(static_cast<size_t>(n), 0.0);
  m.b.assign(static_cast<size_t>(n), 0.0);
  m.c.assign(static_cast<size_t>(n), 1.0);
  m.d.assign(static_cast<size_t>(n), 0.0);
  m.e.assign(static_cast<size_t>(n), 0.0);
  auto row = [&](int i, double aa, double bb, double cc, double dd, double ee) {
    m.a[static_cast<size_t>(i)] = aa * k;
    m.b[static_cast<size_t>(i)] = bb * k;
    m.c[static_cast<size_t>(i)] = 1.0 + cc * k;
    m.d[static_cast<size_t>(i)] = dd * k;
    m.e[static_cast<size_t>(i)] = ee * k;
  };
  if (grid.periodic) {
    for (int i = 0; i < n; ++i) row(i, 1.0, -4.0, 6.0, -4.0, 1.0);
    return m;  // corner couplings handled by the Woodbury correction
  }
  // clamped value + zero curvature: ghost u_{-1} = -u_1
  for (int i = 2; i + 2 < n; ++i) row(i, 1.0, -4.0, 6.0, -4.0, 1.0);
  if (n >= 4) {
    row(1, 0.0, -4.0, 5.0, -4.0, 1.0);
    row(n - 2, 1.0, -4.0, 5.0, -4.0, 0.0);
  }
  // Dirichlet rows
  m.a[0] = m.b[0] = m.d[0] = m.e[0] = 0.0;
  m.c[0] = 1.0;
  const size_t last = static_cast<size_t>(n - 1);
  m.a[last] = m.b[last] = m.d[last] = m.e[last] = 0.0;
  m.c[last] = 1.0;
  return m;
}

/// Cyclic pentadiagonal solve by a rank-4 Woodbury correction.
bool cyclic_penta_solve(const PentaBands& bands, double corner, const std::vector<double>& rhs,
                        std::vector<double>& x) {
  const size_t n = bands.c.size();
  // corner couplings of the periodic five-point stencil, scaled by `corner`
  // rows 0,1 reach columns n-2,n-1; rows n-2,n-1 reach columns 0,1
  const int u_idx[4] = {0, 1, static_cast<int>(n) - 2, static_cast<int>(n) - 1};
  std::vector<std::vector<double>> vrows(4, std::vector<double>(n, 0.0));
  vrows[0][n - 2] = corner;
  vrows[0][n - 1] = -4.0 * corner;
  vrows[1][n - 1] = corner;
  vrows[2][0] = corner;
  vrows[3][0] = -4.0 * corner;
  vrows[3][1] = corner;

  auto solve_banded = [&](const std::vector<double>& b, std::vector<double>& out) {
    return penta_solve(bands.a, bands.b, bands.c, bands.d, bands.e, b, out);
  };

  std::vector<double> base;
  if (!solve_banded(rhs, base)) return false;
  std::vector<std::vector<double>> z(4);
  for (int j = 0; j < 4; ++j) {
    std::vector<double> col(n, 0.0);
    col[static_cast<size_t>(u_idx[j])] = 1.0;
    if (!solve_banded(col, z[static_cast<size_t>(j)])) return false;
  }
  DenseMatrix cap(4, 4);
  std::vector<double> w(4, 0.0);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      double acc = (i == j) ? 1.0 : 0.0;
      for (size_t r = 0; r < n; ++r)
        acc += vrows[static_cast<size_t>(i)][r] * z[static_cast<size_t>(j)][r];
      cap.at(i, j) = acc;
    }
    double acc = 0.0;
    for (size_t r = 0; r < n; ++r) acc += vrows[static_cast<size_t>(i)][r] * base[r];
    w[static_cast<size_t>(i)] = acc;
  }
  std::vector<double> s;
  if (!lu_solve(cap, w, s)) return false;
  x = base;
  for (int j = 0; j < 4; ++j)
    for (size_t r = 0; r < n; ++r) x[r] -= z[static_cast<size_t>(j)][r] * s[static_cast<size_t>(j)];
  return true;
}

}  // namespace

void pde_step(std::vector<double>& u, double t, double dt, const ProblemParams& params,
              const PdeGrid& grid, bool absorption) {
  if (params.m != 2) throw std::invalid_argument("pde_step: implemented for m = 2");
  if (!(t > 0.0)) throw std::invalid_argument("pde_step: t must be positive");
  grid.validate();
  const int n = grid.n;
  if (static_cast<int>(u.size()) != n) throw std::invalid_argument("pde_step: state size mismatch");

  std::vector<double> rhs(u.size());
  const double h = absorption ? std::pow(t, params.alpha) : 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    const double f = absorption ? nonlinearity(u[i], params.p, params.variant) : 0.0;
    rhs[i] = u[i] - dt * h * f;
  }
  if (!grid.periodic) {
    rhs[0] = 0.0;
    rhs[u.size() - 1] = 0.0;
  }
  const PentaBands bands = implicit_matrix(dt, grid);
  std::vector<double> next;
  bool ok;
  if (grid.periodic) {
    const double corner = dt / std::pow(grid.dx(), 4);
    ok = cyclic_penta_solve(bands, corner, rhs, next);
  } else {
    ok = penta_solve(bands.a, bands.b, bands.c, bands.d, bands.e, rhs, next);
  }
  if (!ok) throw std::runtime_error("pde_step: linear solve failed");
  for (const double v : next)
    if (!std::isfinite(v)) throw std::runtime_error("pde_step: state became non-finite");
  u.swap(next);
}

RescaleResult rescale_to_similarity(const std::vector<double>& u, double t, const PdeGrid& grid,
                                    double beta, int m, const std::vector<double>& y_grid) {
  if (!(t > 0.0)) throw std::invalid_argument("rescale_to_similarity: t must be positive");
  RescaleResult out;
  out.values.resize(y_grid.size(), 0.0);
  const double stretch = std::pow(t, 1.0 / (2.0 * m));
  const double amp = std::pow(t, beta);
  const double dx = grid.dx();
  const int n = static_cast<int>(u.size());
  for (size_t k = 0; k < y_grid.size(); ++k) {
    const double x = y_grid[k] * stretch;
    if (x < -grid.half_width || x > grid.half_width) {
      out.domain_exhausted = true;
      continue;
    }
    // 4-point Lagrange interpolation on the uniform grid
    const double pos = (x + grid.half_width) / dx;
    int i1 = static_cast<int>(std::floor(pos));
    i1 = std::max(1, std::min(n - 3, i1));
    const double s = pos - i1;
    const double um1 = u[static_cast<size_t>(i1 - 1)], u0 = u[static_cast<size_t>(i1)],
                 u1 = u[static_cast<size_t>(i1 + 1)], u2 = u[static_cast<size_t>(i1 + 2)];
    const double w_m1 = -s * (s - 1.0) * (s - 2.0) / 6.0;
    const double w_0 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    const double w_1 = -(s + 1.0) * s * (s - 2.0) / 2.0;
    const double w_2 = (s + 1.0) * s * (s - 1.0) / 6.0;
    out.values[k] = amp * (w_m1 * um1 + w_0 * u0 + w_1 * u1 + w_2 * u2);
  }
  return out;
}

std::vector<double> kernel_initial_data(const PdeGrid& grid, double t_age, int m) {
  if (!(t_age > 0.0)) throw std::invalid_argument("kernel_initial_data: t_age must be positive");
  std::vector<double> u(static_cast<size_t>(grid.n), 0.0);
  const double scale = std::pow(t_age, -1.0 / (2.0 * m));
  for (int i = 0; i < grid.n; ++i) {
    const double y = grid.x(i) * scale;
    u[static_cast<size_t>(i)] = scale * kernel_derivative(std::abs(y), 0, m);
  }
  return u;
}

StabilityRecord stability_experiment(const ProfileSolution& v0, double perturbation_size,
                                     double t0, double t1, const PdeGrid& grid,
                                     int record_points) {
  grid.validate();
  if (!(t1 > t0) || !(t0 > 0.0))
    throw std::invalid_argument("stability_experiment: need 0 < t0 < t1");
  const ProblemParams& params = v0.params;
  if (params.m != 2) throw std::invalid_argument("stability_experiment: m = 2 only");
  const double b = beta(params);

  StabilityRecord rec;
  rec.y_window = std::min(v0.grid.back(), 0.95 * grid.half_width / std::pow(t1, 0.25));

  // comparison y-grid and reference values
  std::vector<double> y_grid;
  std::vector<double> v_ref;
  for (double y = -rec.y_window; y <= rec.y_window + 1e-12; y += 0.05) {
    y_grid.push_back(y);
    v_ref.push_back(v0.state_at(y)[0]);
  }

  // initial data: relatively perturbed profile at t0
  std::vector<double> u(static_cast<size_t>(grid.n), 0.0);
  const double stretch = std::pow(t0, 0.25);
  for (int i = 0; i < grid.n; ++i) {
    const double y = grid.x(i) / stretch;
    const double v = (std::abs(y) <= v0.grid.back()) ? v0.state_at(y)[0] : 0.0;
    u[static_cast<size_t>(i)] = std::pow(t0, -b) * v * (1.0 + perturbation_size);
  }

  std::vector<double> record_times;
  for (int k = 0; k < record_points; ++k)
    record_times.push_back(t0 * std::pow(t1 / t0, k / double(record_points - 1)));

  double t = t0;
  size_t next_record = 0;
  auto record = [&](double at) {
    const RescaleResult w = rescale_to_similarity(u, at, grid, b, params.m, y_grid);
    if (w.domain_exhausted) rec.domain_exhausted = true;
    double dist = 0.0;
    for (size_t i = 0; i < y_grid.size(); ++i)
      dist = std::max(dist, std::abs(w.values[i] - v_ref[i]));
    rec.times.push_back(at);
    rec.distances.push_back(dist);
  };
  record(t);
  ++next_record;

  while (t < t1 - 1e-12) {
    double dt = grid.dt0 * t;
    const double t_target =
        (next_record < record_times.size()) ? record_times[next_record] : t1;
    if (t + dt > t_target) dt = t_target - t;
    pde_step(u, t, dt, params, grid);
    t += dt;
    if (next_record < record_times.size() && t >= record_times[next_record] - 1e-12) {
      record(t);
      ++next_record;
    }
  }
  if (!rec.distances.empty())
    rec.pass = rec.distances.back() <= rec.distances.front() / 3.0;
  return rec;
}

}  // namespace vss
