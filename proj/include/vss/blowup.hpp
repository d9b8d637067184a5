#pragma once

#include <string>
#include <vector>

#include "vss/odesys.hpp"

namespace vss {

/// Orbit of the core equation V'''' = -|V|^{p-1} V with singularity data.
struct BlowupOrbit {
  double p = 0.0;
  double y_start = 0.0;
  Trajectory trajectory;
  bool blew_up = false;
  double y0_est = 0.0;        ///< adopted singularity location
  double y0_envelope = 0.0;   ///< from the extrema-envelope fit
  double y0_zeros = 0.0;      ///< from geometric extrapolation of the zeros
  bool y0_consistent = false; ///< the two estimates agree within 1%
  double mu_fit = 0.0;        ///< envelope exponent; -4/(p-1) predicted
  double envelope_fit_residual = 0.0;
  std::vector<double> zeros;
  double ratio_mean = 0.0;    ///< (y0 - z_{k+1}) / (y0 - z_k), last zeros
  double ratio_stddev = 0.0;
  std::string note;
};

/// Integrates until the overflow guard trips, then estimates y0 and the
/// envelope exponent and extracts the zero ladder.
BlowupOrbit run_blowup(double p, const StateVector& init, const IntegratorConfig& config,
                       double y_start = 0.0, double y_max = 60.0);

/// Log-variable frame: phi(s) = (y0 - y)^{-mu} V(y), s = ln(y0 - y).
/// The residual of the transformed samples against the autonomous
/// oscillatory equation is evaluated exactly through the chain rule
/// (all derivatives come from the integrated state, not differencing).
struct OscillatoryFrame {
  double mu = 0.0;
  std::vector<double> s;
  std::vector<double> phi;
  std::vector<double> residual;      ///< per-sample, relative to the largest term
  double mid_window_max_residual = 0.0;
};

OscillatoryFrame to_oscillatory_frame(const BlowupOrbit& orbit);

}  // namespace vss
