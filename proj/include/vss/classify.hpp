#pragma once

#include <string>
#include <vector>

#include "vss/shoot.hpp"

namespace vss {

enum class Family { Basic, Sigma1, Sigma2, Sigma3, Unclassified };

std::string to_string(Family family);

/// Place of a profile in the taxonomy: count of dominant extrema, the
/// signed crossing tokens, and the family read off the token structure.
struct ProfileTaxonomy {
  int dominant_extrema = 0;                ///< on the symmetric extension
  int basic_index = -1;                    ///< k of Basic(k); -1 otherwise
  std::vector<std::string> multiindex;     ///< e.g. {"+0", "1", "-3"}
  Family family = Family::Unclassified;
};

/// Interior extrema on [-L, L] with |V| >= delta * max|V|; extrema closer
/// than the local grid step are merged.
int dominant_extrema(const ProfileSolution& profile, double delta = 0.1);

/// Signed tokens counting effective crossings of the equilibria the profile
/// consecutively oscillates about (+V_+ / 0 / -V_+ bands of width delta*V_+).
std::vector<std::string> multiindex(const ProfileSolution& profile, double delta = 0.1);

ProfileTaxonomy classify_profile(const ProfileSolution& profile, double delta = 0.1);

/// Integral identities a genuine profile must satisfy.
struct IdentityReport {
  double mass_residual = 0.0;      ///< |c1 Int V - Int f(V)| / scale, full line
  double halfline_residual = 0.0;  ///< half-line version with the boundary term
  bool mass_ok = false;            ///< mass_residual <= 1e-6
  double lhs1 = 0.0;               ///< -Int (W'')^2 + Int W^2 - Int |W|^{p+1}
  double lhs2 = 0.0;               ///< -3/2 Int (W'')^2 - 1/2 Int W^2 + Int|W|^{p+1}/(p+1)
  double ratio = 0.0;              ///< Int W^2 / Int |W|^{p+1}
  double gamma0_value = 0.0;
  bool pohozaev_evaluated = false;
};

inline constexpr double kMassIdentityTol = 1e-6;

/// c1 Int V = Int f(V) on the symmetric extension (exponential decay
/// assumed; algebraic tails are rejected).  Also evaluates the half-line
/// variant carrying the V^{(2m-1)}(0) boundary term, which stays
/// informative for odd profiles where the full-line identity is vacuous.
IdentityReport mass_identity(const ProfileSolution& profile);

/// Pohozaev pair of the limit equation on a sampled candidate W(y), y >= 0.
/// A genuine decaying solution has lhs1 = lhs2 = 0 and ratio = gamma0(p);
/// a step-like candidate forces ratio near 1 instead.
IdentityReport pohozaev_check(const std::vector<double>& grid, const std::vector<double>& w,
                              double p);

}  // namespace vss
