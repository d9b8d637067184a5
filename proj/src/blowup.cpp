#include "vss/blowup.hpp"

#include <algorithm>
#include <cmath>

#include "vss/linalg.hpp"

namespace vss {

namespace {

/// Linear fit ln|M_k| = c + mu ln(y0 - y_k); returns the RMS residual.
double envelope_rms(const std::vector<double>& ys, const std::vector<double>& vals, double y0,
                    double& mu, double& c) {
  std::vector<double> ones(ys.size(), 1.0), xs(ys.size()), rhs(ys.size());
  for (size_t i = 0; i < ys.size(); ++i) {
    xs[i] = std::log(y0 - ys[i]);
    rhs[i] = std::log(std::abs(vals[i]));
  }
  std::vector<double> coef;
  if (!least_squares({ones, xs}, rhs, coef)) {
    mu = 0.0;
    c = 0.0;
    return 1e300;
  }
  c = coef[0];
  mu = coef[1];
  double rss = 0.0;
  for (size_t i = 0; i < ys.size(); ++i) {
    const double r = rhs[i] - c - mu * xs[i];
    rss += r * r;
  }
  return std::sqrt(rss / ys.size());
}

}  // namespace

BlowupOrbit run_blowup(double p, const StateVector& init, const IntegratorConfig& config,
                       double y_start, double y_max) {
  if (!(p > 1.0)) throw std::invalid_argument("run_blowup: p must exceed 1");
  BlowupOrbit orbit;
  orbit.p = p;
  orbit.y_start = y_start;

  ProblemParams params;
  params.p = p;
  orbit.trajectory =
      integrate(OdeForm::BlowupCore, params, y_start, y_start + y_max, init, config);
  orbit.zeros = orbit.trajectory.zeros;
  orbit.blew_up = orbit.trajectory.status == IntegrateStatus::Overflow;
  if (!orbit.blew_up) {
    orbit.note = "no blow-up before y = " + std::to_string(y_start + y_max);
    return orbit;
  }
  const double y_trunc = orbit.trajectory.y_stop;

  // envelope from the recorded |V| extrema past the first sign change
  std::vector<double> ey, ev;
  const auto& ex = orbit.trajectory.extrema_y;
  const auto& exv = orbit.trajectory.extrema_v;
  const double first_zero = orbit.zeros.empty() ? y_start : orbit.zeros.front();
  for (size_t i = 0; i < ex.size(); ++i) {
    if (ex[i] > first_zero && std::abs(exv[i]) > 0.0) {
      ey.push_back(ex[i]);
      ev.push_back(exv[i]);
    }
  }
  if (ey.size() > 12) {
    ey.erase(ey.begin(), ey.end() - 12);
    ev.erase(ev.begin(), ev.end() - 12);
  }
  if (ey.size() < 4 || orbit.zeros.size() < 4) {
    orbit.note = "too few oscillations before truncation for the fits";
    return orbit;
  }

  // golden-section search of y0 for the best envelope fit
  {
    const double phi_ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = y_trunc + 1e-9;
    double hi = y_trunc + std::max(1.0, 0.5 * (y_trunc - ey.front()));
    auto rms_at = [&](double y0) {
      double mu, c;
      return envelope_rms(ey, ev, y0, mu, c);
    };
    double a = lo, b = hi;
    double x1 = b - phi_ratio * (b - a), x2 = a + phi_ratio * (b - a);
    double f1 = rms_at(x1), f2 = rms_at(x2);
    for (int it = 0; it < 80; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - phi_ratio * (b - a);
        f1 = rms_at(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + phi_ratio * (b - a);
        f2 = rms_at(x2);
      }
    }
    orbit.y0_envelope = 0.5 * (a + b);
    double c;
    orbit.envelope_fit_residual = envelope_rms(ey, ev, orbit.y0_envelope, orbit.mu_fit, c);
  }

  // zero-ladder extrapolation: gaps shrink geometrically toward y0
  {
    const size_t n = orbit.zeros.size();
    const double g1 = orbit.zeros[n - 2] - orbit.zeros[n - 3];
    const double g2 = orbit.zeros[n - 1] - orbit.zeros[n - 2];
    const double r = g2 / g1;
    if (r > 0.0 && r < 1.0) {
      orbit.y0_zeros = orbit.zeros[n - 1] + g2 * r / (1.0 - r);
    } else {
      orbit.y0_zeros = orbit.y0_envelope;
      orbit.note += "zero ladder not contracting; ";
    }
  }

  orbit.y0_est = orbit.y0_envelope;
  orbit.y0_consistent =
      std::abs(orbit.y0_envelope - orbit.y0_zeros) <= 0.01 * std::abs(orbit.y0_envelope);
  if (!orbit.y0_consistent) orbit.note += "envelope and zero-ladder y0 disagree; ";

  // geometric-ratio statistics over the last five zeros
  {
    const size_t n = orbit.zeros.size();
    const size_t take = std::min<size_t>(5, n);
    std::vector<double> ratios;
    for (size_t i = n - take; i + 1 < n; ++i) {
      const double d0 = orbit.y0_est - orbit.zeros[i];
      const double d1 = orbit.y0_est - orbit.zeros[i + 1];
      if (d0 > 0.0 && d1 > 0.0) ratios.push_back(d1 / d0);
    }
    if (!ratios.empty()) {
      double mean = 0.0;
      for (const double r : ratios) mean += r;
      mean /= ratios.size();
      double var = 0.0;
      for (const double r : ratios) var += (r - mean) * (r - mean);
      orbit.ratio_mean = mean;
      orbit.ratio_stddev = std::sqrt(var / ratios.size());
    }
  }
  return orbit;
}

OscillatoryFrame to_oscillatory_frame(const BlowupOrbit& orbit) {
  if (!orbit.blew_up || orbit.y0_est <= orbit.trajectory.y_stop)
    throw std::invalid_argument("to_oscillatory_frame: orbit lacks a usable y0 estimate");
  OscillatoryFrame frame;
  const double p = orbit.p;
  const double mu = -4.0 / (p - 1.0);
  frame.mu = mu;

  // phi-derivative coefficients over T_j = (y0-y)^{j-mu} V^{(j)}:
  // d/ds T_j = (j - mu) T_j - T_{j+1}
  std::array<std::array<double, 5>, 5> coef{};  // coef[k][j]: phi^{(k)} = sum coef T_j
  coef[0][0] = 1.0;
  for (int k = 1; k <= 4; ++k) {
    for (int j = 0; j <= k; ++j) {
      double acc = 0.0;
      if (j <= k - 1) acc += coef[static_cast<size_t>(k - 1)][static_cast<size_t>(j)] * (j - mu);
      if (j >= 1) acc -= coef[static_cast<size_t>(k - 1)][static_cast<size_t>(j - 1)];
      coef[static_cast<size_t>(k)][static_cast<size_t>(j)] = acc;
    }
  }
  const double c3 = 2.0 * (2.0 * mu - 3.0);
  const double c2 = 6.0 * mu * mu - 18.0 * mu + 11.0;
  const double c1 = 2.0 * (2.0 * mu * mu * mu - 9.0 * mu * mu + 11.0 * mu - 3.0);
  const double c0 = mu * (mu - 1.0) * (mu - 2.0) * (mu - 3.0);

  const Trajectory& traj = orbit.trajectory;
  for (size_t i = 0; i < traj.size(); ++i) {
    const double y = traj.ys[i];
    const double w = orbit.y0_est - y;
    if (w <= 1e-12) break;
    double T[5];
    for (int j = 0; j < 4; ++j) T[j] = std::pow(w, j - mu) * traj.value(i, j);
    const double v = traj.value(i, 0);
    T[4] = std::pow(w, 4 - mu) * (-nonlinearity(v, p, Variant::Monotone));
    double d[5];
    for (int k = 0; k <= 4; ++k) {
      double acc = 0.0;
      for (int j = 0; j <= k; ++j)
        acc += coef[static_cast<size_t>(k)][static_cast<size_t>(j)] * T[j];
      d[k] = acc;
    }
    const double phi = d[0];
    const double nl = nonlinearity(phi, p, Variant::Monotone);
    const double res = d[4] + c3 * d[3] + c2 * d[2] + c1 * d[1] + c0 * phi + nl;
    const double scale = std::max({1.0, std::abs(d[4]), std::abs(c2 * d[2]), std::abs(c0 * phi),
                                   std::abs(nl)});
    frame.s.push_back(std::log(w));
    frame.phi.push_back(phi);
    frame.residual.push_back(res / scale);
  }

  if (frame.s.size() >= 6) {
    const size_t lo = frame.s.size() / 3;
    const size_t hi = 2 * frame.s.size() / 3;
    for (size_t i = lo; i < hi; ++i)
      frame.mid_window_max_residual =
          std::max(frame.mid_window_max_residual, std::abs(frame.residual[i]));
  }
  return frame;
}

}  // namespace vss
