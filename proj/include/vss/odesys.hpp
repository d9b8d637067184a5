#pragma once

#include <array>
#include <functional>
#include <vector>

#include "vss/params.hpp"

namespace vss {

/// Hard cap on first-order system dimension (2m for the profile ODE).
inline constexpr int kMaxOdeDim = 12;

/// First-order state (V, V', ..., V^(2m-1)) at a point y.
struct StateVector {
  std::array<double, kMaxOdeDim> v{};
  int dim = 0;

  StateVector() = default;
  explicit StateVector(int n) : dim(n) {}
  StateVector(std::initializer_list<double> init);

  double& operator[](int i) { return v[static_cast<size_t>(i)]; }
  double operator[](int i) const { return v[static_cast<size_t>(i)]; }
  double max_abs() const;
  bool finite() const;
};

/// Right-hand sides defined by the model equations.
enum class OdeForm { ProfileOriginal, ProfileRescaled, BlowupCore, OscillatoryComponent };

using RhsFn = std::function<void(double y, const double* v, double* dv)>;

/// System dimension of a given form (2m for profiles, 4 for the m=2 cores).
int ode_dimension(OdeForm form, int m);

/// dstate/dy for the profile equation, original or rescaled form.
StateVector profile_rhs(double y, const StateVector& state, const ProblemParams& params,
                        OdeForm form);

/// dstate/dy for the blow-up core V'''' = -|V|^{p-1} V.
StateVector blowup_rhs(double y, const StateVector& state, double p);

/// dstate/dy for the oscillatory component in the log variable s.
StateVector oscillatory_rhs(double s, const StateVector& state, double p);

/// Bundles a form into a callable system.
RhsFn make_rhs(OdeForm form, const ProblemParams& params);

struct IntegratorConfig {
  double rtol = 1e-10;
  double atol = 1e-12;
  double max_step = 0.0;          ///< 0 means unrestricted
  double overflow_guard = 1e8;    ///< state-norm ceiling; crossing it stops the run
  double dense_step = 0.05;       ///< output sampling interval
};

enum class IntegrateStatus {
  Ok,             ///< reached y_end
  Overflow,       ///< state norm exceeded overflow_guard (blow-up detected)
  StepUnderflow,  ///< step size collapsed (stiffness or singularity)
  NonFinite,      ///< NaN/Inf appeared in the state
};

/// Dense-output record of one integration.
struct Trajectory {
  IntegrateStatus status = IntegrateStatus::Ok;
  int dim = 0;
  double y_start = 0.0;
  double y_end = 0.0;      ///< requested endpoint
  double y_stop = 0.0;     ///< where integration actually stopped
  StateVector final_state;

  std::vector<double> ys;        ///< sample locations
  std::vector<double> states;    ///< row-major samples, ys.size() x dim
  std::vector<double> zeros;     ///< sign changes of component 0
  std::vector<double> extrema_y; ///< sign changes of component 1
  std::vector<double> extrema_v; ///< component-0 value there

  size_t size() const { return ys.size(); }
  double value(size_t i, int component) const { return states[i * dim + component]; }
  /// Piecewise Hermite/linear interpolation of the stored samples.
  StateVector state_at(double y) const;

  bool reached_end() const { return status == IntegrateStatus::Ok; }
};

/// Adaptive embedded Runge-Kutta (Dormand-Prince 5(4)) with dense output,
/// step rejection and overflow detection.  y_end < y_start integrates backwards.
Trajectory integrate(const RhsFn& rhs, int dim, double y_start, double y_end,
                     const StateVector& init, const IntegratorConfig& config);

/// Convenience overload for the named forms.
Trajectory integrate(OdeForm form, const ProblemParams& params, double y_start, double y_end,
                     const StateVector& init, const IntegratorConfig& config);

}  // namespace vss
