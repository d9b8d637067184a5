#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vss/odesys.hpp"
#include "vss/params.hpp"
#include "vss/spectral.hpp"

namespace vss {

struct NewtonOptions {
  int max_iter = 40;
  double damping_min = 1.0 / 64.0;
  double residual_tol = 1e-9;
  double jacobian_fd_step = 1e-7;
  bool trace = false;  ///< per-iteration diagnostics on stderr
};

/// Shooting problem on [0, L]: m free parameters at the origin (the
/// non-vanishing derivatives allowed by the parity), m decay conditions at L.
///
/// Wide profiles are handled by splitting [0, L] into segments with interior
/// matching states, so that no single integration amplifies errors beyond
/// exp(segment_gain); narrow profiles collapse to plain single shooting.
struct ShootSpec {
  Parity parity = Parity::Even;
  double L = 14.0;
  std::vector<double> free_params;
  OdeForm form = OdeForm::ProfileOriginal;
  IntegratorConfig config{};
  NewtonOptions newton{};
  double amplitude_floor = 0.0;  ///< 0 derives 1e-4 * max(1, V_+)
  double segment_gain = 6.0;     ///< ln of tolerated per-segment error growth
  int max_segments = 40;
};

enum class SolveStatus {
  Converged,
  NewtonDiverged,
  BlowupInShot,
  TrivialSolution,
  AlgebraicTail,
  IntegratorFailure,
  BadInput,
};

std::string to_string(SolveStatus status);

enum class TailKind { Exponential, Algebraic, Undetermined };

std::string to_string(TailKind kind);

/// Tail model fitted to the envelope of |V| local maxima.
/// Exponential: |V| ~ exp(-rate * y^{2m/(2m-1)}); Algebraic: |V| ~ y^{rate}.
struct DecayEstimate {
  TailKind kind = TailKind::Undetermined;
  double fitted_rate = 0.0;
  double fit_lo = 0.0;
  double fit_hi = 0.0;
  double fit_residual = 0.0;
  int tail_sign_changes = 0;
};

struct ProfileSolution {
  ProblemParams params;
  Parity parity = Parity::Even;
  OdeForm form = OdeForm::ProfileOriginal;
  double L = 0.0;
  std::vector<double> shooting_params;
  double amplitude = 0.0;      ///< V(0) for even profiles, max|V| for odd
  double residual_norm = 0.0;
  DecayEstimate tail;
  std::vector<double> grid;    ///< increasing, grid.front() == 0
  std::vector<double> values;  ///< row-major, grid.size() x 2m

  int dim() const { return 2 * params.m; }
  double value(size_t i, int component) const { return values[i * dim() + component]; }
  StateVector state_at(double y) const;
  double max_abs() const;
  /// Extent of {|V| >= frac * max|V|} on the symmetric extension.
  double support_width(double frac = 0.05) const;
};

/// Component-0 (V) samples of a profile.
std::vector<double> component_view(const ProfileSolution& profile);

struct SolveResult {
  SolveStatus status = SolveStatus::BadInput;
  std::optional<ProfileSolution> profile;
  std::string message;
  double overflow_y = 0.0;
  int iterations = 0;

  bool ok() const { return status == SolveStatus::Converged; }
};

/// Augments the shooting system with the continuation parameter as an
/// unknown and one arclength-normalization row.
struct ContinuationCoupling {
  enum class Which { P, Alpha };
  Which which = Which::P;
  double param_init = 0.0;
  double param_pred = 0.0;
  std::vector<double> c_pred;
  double weight_param = 0.0;
  std::vector<double> weight_c;
  double param_out = 0.0;  ///< set on convergence
};

/// Origin state from the free parameters: even profiles carry
/// (V, V'', ...)(0), odd ones (V', V''', ...)(0); the rest vanish exactly.
StateVector initial_state(Parity parity, const std::vector<double>& free_params, int m);

/// (V, V', ..., V^{(m-1)})(L) / max(1, max|V|).  Throws on truncated input.
std::vector<double> terminal_residual(const Trajectory& traj, double L, int m, double scale = 0.0);

/// warm, when given, supplies interior matching states from a previous
/// solution (its parameters may differ; the corrector absorbs the mismatch).
SolveResult solve_profile(const ProblemParams& params, const ShootSpec& spec,
                          const ProfileSolution* warm = nullptr,
                          ContinuationCoupling* coupling = nullptr);

/// Free parameters of the small-amplitude profile born at p_l, read off the
/// scaled eigenfunction.  Requires p < p_l and kappa_l > 0.
std::vector<double> seed_from_bifurcation(int l, double p, const ProblemParams& params,
                                          const KernelTable& kernel);

/// The full predicted small-amplitude profile A psi_l on [0, L]; serves as a
/// warm start (interior matching states) for the first solve of a branch.
ProfileSolution bifurcation_guess(int l, double p, const ProblemParams& params,
                                  const KernelTable& kernel, double L, double grid_step = 0.05);

/// Tail classification of a sampled profile on [0, L].
DecayEstimate classify_decay(const std::vector<double>& grid, const std::vector<double>& v,
                             int m, double p, double window_lo_frac = 0.6,
                             double window_hi_frac = 0.95);

DecayEstimate classify_decay(const ProfileSolution& profile);

}  // namespace vss
