#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vss/classify.hpp"
#include "vss/shoot.hpp"

namespace vss {

enum class BranchKind { InP, InAlpha };

struct BranchPoint {
  double param = 0.0;
  std::vector<double> shooting_params;
  double amplitude = 0.0;
  double support_width = 0.0;
  double residual_norm = 0.0;
  double mass_residual = 0.0;
};

struct BranchEvent {
  enum class Type { TurningPoint, ZeroAmplitudeEnd, ParamLimit, SolverLoss, ClosedLoop, Anomaly };
  Type type;
  double param = 0.0;
  int matched_l = -1;
  std::string note;
};

std::string to_string(BranchEvent::Type type);

struct Branch {
  BranchKind kind = BranchKind::InP;
  double fixed_param = 0.0;  ///< alpha for InP branches, p for InAlpha
  ProblemParams base_params;
  Parity parity = Parity::Even;
  std::vector<BranchPoint> points;
  std::vector<BranchEvent> events;
  std::optional<ProfileSolution> last_profile;
  std::map<double, ProfileSolution> checkpoint_profiles;

  bool has_event(BranchEvent::Type type) const;
  const BranchEvent* find_event(BranchEvent::Type type) const;
};

/// Pseudo-arclength step control.  The metric is
/// ds^2 = (dparam)^2 + sum (dc_i / max(1,|c_i|))^2.
struct StepControl {
  double ds_init = 1e-2;
  double ds_min = 1e-6;
  double ds_max = 0.25;
  double param_min = -0.99;
  double param_max = 1e9;
  int max_points = 6000;
  double loop_tol = 1e-3;
  int min_loop_steps = 10;
  double turning_refine = 1e-3;  ///< fold localized to this param resolution
  std::vector<double> checkpoints;  ///< params at which a profile is stored
  ShootSpec shoot;               ///< template; L adapts to the support width
  bool adaptive_length = true;
  bool enforce_mass_identity = true;
};

/// Traces the branch through params from a converged start point.
/// direction: +1 continues toward larger param first, -1 toward smaller.
Branch continue_branch(const ProfileSolution& start, BranchKind kind, int direction,
                       const StepControl& ctrl);

/// Parameter values where dparam changes sign along the stored points.
std::vector<double> detect_turning_points(const Branch& branch);

/// l whose bifurcation exponent lies within tol of the branch endpoint.
std::optional<int> match_endpoint(const Branch& branch, double tol = 1e-2);

struct CensusOptions {
  Parity parity = Parity::Even;
  int l_max = 400;                  ///< bifurcation index scan cap
  double seed_offset = 0.1;         ///< distance past the bifurcation point
  bool use_bifurcation_seeds = true;
  std::vector<std::vector<double>> extra_seeds;  ///< direct free-parameter guesses
  int threads = 0;                  ///< 0 = hardware concurrency
  StepControl step;
  double dedup_tol = 1e-4;
};

struct CensusRecord {
  int l = -1;                       ///< seeding bifurcation index, -1 for direct seeds
  std::vector<double> seed;
  SolveStatus status = SolveStatus::BadInput;
  std::string note;
  std::optional<ProfileSolution> profile;
  ProfileTaxonomy taxonomy;
  bool accepted = false;            ///< converged, admissible, and distinct
};

struct CensusResult {
  std::vector<CensusRecord> records;
  std::vector<size_t> distinct;     ///< indices of accepted records
};

/// Runs solve attempts from bifurcation-continuation seeds (for every
/// eligible l of the requested parity) plus any direct seeds, then
/// deduplicates by (amplitude, support width, extrema count).
CensusResult sweep_profile_census(const ProblemParams& target, const CensusOptions& options);

}  // namespace vss
