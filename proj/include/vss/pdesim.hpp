#pragma once

#include <vector>

#include "vss/params.hpp"
#include "vss/shoot.hpp"

namespace vss {

/// Uniform 1D grid for the fourth-order model (m = 2 only).
/// Boundary: zero value and zero second derivative at +-A, or periodic.
struct PdeGrid {
  double half_width = 40.0;
  int n = 2048;
  double dt0 = 1e-3;     ///< step at t = 1; the step grows proportionally to t
  bool periodic = false;

  double dx() const {
    return periodic ? 2.0 * half_width / n : 2.0 * half_width / (n - 1);
  }
  double x(int i) const { return -half_width + i * dx(); }

  void validate() const;
};

/// One linearly implicit step: (I + dt D4) u^{new} = u - dt t^alpha f(u).
/// The stiff linear part is treated implicitly by a pentadiagonal solve,
/// the absorption explicitly.
void pde_step(std::vector<double>& u, double t, double dt, const ProblemParams& params,
              const PdeGrid& grid, bool absorption = true);

struct RescaleResult {
  std::vector<double> values;
  bool domain_exhausted = false;  ///< some y fell outside the x-domain
};

/// w(y) = t^beta u(y t^{1/2m}, t), interpolated onto the given y-grid.
RescaleResult rescale_to_similarity(const std::vector<double>& u, double t, const PdeGrid& grid,
                                    double beta, int m, const std::vector<double>& y_grid);

/// Sampled kernel solution b(x, t_age) as initial data (exact evolution of
/// the point mass under the linear flow).
std::vector<double> kernel_initial_data(const PdeGrid& grid, double t_age, int m = 2);

struct StabilityRecord {
  std::vector<double> times;
  std::vector<double> distances;  ///< sup |w(., t) - V0| on the comparison window
  bool pass = false;              ///< final distance <= initial distance / 3
  bool domain_exhausted = false;
  double y_window = 0.0;
};

/// Evolves V0 (1 + perturbation) and tracks the rescaled sup-distance to V0
/// over t in [t0, t1].
StabilityRecord stability_experiment(const ProfileSolution& v0, double perturbation_size,
                                     double t0, double t1, const PdeGrid& grid,
                                     int record_points = 13);

}  // namespace vss
