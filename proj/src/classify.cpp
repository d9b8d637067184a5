#include "vss/classify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vss {

namespace {

struct FullLine {
  std::vector<double> ys;
  std::vector<double> vs;
};

FullLine symmetric_extension(const ProfileSolution& profile) {
  FullLine line;
  const size_t n = profile.grid.size();
  line.ys.reserve(2 * n);
  line.vs.reserve(2 * n);
  const double sign = (profile.parity == Parity::Even) ? 1.0 : -1.0;
  for (size_t i = n; i-- > 1;) {
    line.ys.push_back(-profile.grid[i]);
    line.vs.push_back(sign * profile.value(i, 0));
  }
  for (size_t i = 0; i < n; ++i) {
    line.ys.push_back(profile.grid[i]);
    line.vs.push_back(profile.value(i, 0));
  }
  return line;
}

double trapezoid(const std::vector<double>& xs, const std::vector<double>& ys) {
  double acc = 0.0;
  for (size_t i = 0; i + 1 < xs.size(); ++i)
    acc += 0.5 * (xs[i + 1] - xs[i]) * (ys[i] + ys[i + 1]);
  return acc;
}

double equilibrium_value(const ProfileSolution& profile) {
  if (profile.form == OdeForm::ProfileRescaled) return 1.0;
  return derive(profile.params).v_plus;
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::Basic: return "basic";
    case Family::Sigma1: return "sigma1";
    case Family::Sigma2: return "sigma2";
    case Family::Sigma3: return "sigma3";
    case Family::Unclassified: return "unclassified";
  }
  return "unknown";
}

int dominant_extrema(const ProfileSolution& profile, double delta) {
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("dominant_extrema: delta must lie in (0,1)");
  const FullLine line = symmetric_extension(profile);
  const size_t n = line.ys.size();
  if (n < 3) return 0;
  double vmax = 0.0;
  for (const double v : line.vs) vmax = std::max(vmax, std::abs(v));
  if (vmax <= 0.0) return 0;
  const double floor = delta * vmax;

  // median grid spacing, used as the merge distance
  std::vector<double> steps;
  steps.reserve(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) steps.push_back(line.ys[i + 1] - line.ys[i]);
  std::nth_element(steps.begin(), steps.begin() + steps.size() / 2, steps.end());
  const double merge_dist = 1.5 * steps[steps.size() / 2];

  int count = 0;
  double last_y = -1e300;
  int prev_slope = 0;
  for (size_t i = 0; i + 1 < n; ++i) {
    const double dv = line.vs[i + 1] - line.vs[i];
    const int slope = (dv > 0.0) ? 1 : (dv < 0.0 ? -1 : 0);
    if (slope == 0) continue;
    if (prev_slope != 0 && slope != prev_slope) {
      const double y_ext = line.ys[i];
      const double v_ext = std::abs(line.vs[i]);
      if (v_ext >= floor) {
        if (y_ext - last_y > merge_dist) ++count;
        last_y = y_ext;
      }
    }
    prev_slope = slope;
  }
  return count;
}

std::vector<std::string> multiindex(const ProfileSolution& profile, double delta) {
  const double vplus = equilibrium_value(profile);
  std::vector<double> levels;
  if (profile.params.variant == Variant::Monotone)
    levels = {vplus, 0.0, -vplus};
  else
    levels = {vplus, 0.0};

  const double vmax = profile.max_abs();
  std::vector<std::string> tokens;
  if (vmax < 1e-10 * std::max(1.0, vplus)) return tokens;  // trivial profile

  const size_t n = profile.grid.size();
  auto nearest_level = [&](double v) {
    size_t best = 0;
    double dist = 1e300;
    for (size_t k = 0; k < levels.size(); ++k) {
      const double d = std::abs(v - levels[k]);
      if (d < dist) {
        dist = d;
        best = k;
      }
    }
    return best;
  };

  struct Run {
    size_t level;
    size_t begin, end;  // sample range [begin, end)
  };
  std::vector<Run> runs;
  for (size_t i = 0; i < n; ++i) {
    const size_t lev = nearest_level(profile.value(i, 0));
    if (!runs.empty() && runs.back().level == lev) {
      runs.back().end = i + 1;
    } else {
      runs.push_back({lev, i, i + 1});
    }
  }
  // absorb runs too short to represent a genuine band visit
  const size_t min_len = 3;
  std::vector<Run> merged;
  for (const Run& r : runs) {
    if (!merged.empty() && r.end - r.begin < min_len) {
      merged.back().end = r.end;  // swallow the blip
      continue;
    }
    if (!merged.empty() && merged.back().level == r.level) {
      merged.back().end = r.end;
      continue;
    }
    merged.push_back(r);
  }

  const double band = delta * std::max(vplus, vmax);
  for (size_t ri = 0; ri < merged.size(); ++ri) {
    const Run& r = merged[ri];
    const double level = levels[r.level];
    // effective crossings: sign changes of V - level whose neighboring
    // excursions clear the band on both sides
    std::vector<double> lobes;
    double lobe = 0.0;
    double prev_sign = 0.0;
    for (size_t i = r.begin; i < r.end; ++i) {
      const double d = profile.value(i, 0) - level;
      const double s = (d > 0.0) ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
      if (s == 0.0) continue;
      if (prev_sign != 0.0 && s != prev_sign) {
        lobes.push_back(lobe);
        lobe = 0.0;
      }
      lobe = std::max(lobe, std::abs(d));
      prev_sign = s;
    }
    lobes.push_back(lobe);
    int crossings = 0;
    for (size_t i = 1; i < lobes.size(); ++i)
      if (lobes[i - 1] >= band && lobes[i] >= band) ++crossings;
    const bool last = (ri + 1 == merged.size());
    if (last && levels[r.level] == 0.0 && crossings == 0) continue;  // decay tail
    std::string token;
    if (level > 0.0)
      token = "+" + std::to_string(crossings);
    else if (level < 0.0)
      token = "-" + std::to_string(crossings);
    else
      token = std::to_string(crossings);
    tokens.push_back(token);
  }
  return tokens;
}

ProfileTaxonomy classify_profile(const ProfileSolution& profile, double delta) {
  ProfileTaxonomy tax;
  tax.dominant_extrema = dominant_extrema(profile, delta);
  tax.multiindex = multiindex(profile, delta);

  int nonzero_levels = 0;
  for (const std::string& t : tax.multiindex)
    if (t[0] == '+' || t[0] == '-') ++nonzero_levels;

  // position in the basic spectrum regardless of family, calibrated so the
  // first profile carries index 0
  tax.basic_index = std::max(0, tax.dominant_extrema - 1);

  if (tax.multiindex.empty()) {
    tax.family = Family::Unclassified;
  } else if (nonzero_levels <= 1) {
    tax.family = Family::Basic;
  } else if (nonzero_levels == 2) {
    tax.family = Family::Sigma1;
  } else if (nonzero_levels == 3) {
    tax.family = (tax.multiindex.front()[0] == '+') ? Family::Sigma2 : Family::Sigma3;
  } else {
    tax.family = Family::Unclassified;
  }
  return tax;
}

IdentityReport mass_identity(const ProfileSolution& profile) {
  if (profile.tail.kind == TailKind::Algebraic)
    throw std::invalid_argument("mass_identity: invalid for algebraic tails");
  IdentityReport report;
  const ProblemParams& params = profile.params;
  const DerivedExponents d = derive(params);
  const double b = d.beta;
  const int m = params.m;

  // identity constant: c1 for the original form, its rescaled analogue else
  const double coef = (profile.form == OdeForm::ProfileOriginal)
                          ? d.c1
                          : 1.0 - params.N / (2.0 * m * b);

  const size_t n = profile.grid.size();
  std::vector<double> vf(n);
  std::vector<double> vv(n);
  for (size_t i = 0; i < n; ++i) {
    vv[i] = profile.value(i, 0);
    vf[i] = nonlinearity(vv[i], params.p, params.variant);
  }
  const double iv_half = trapezoid(profile.grid, vv);
  const double if_half = trapezoid(profile.grid, vf);

  // half line: (-1)^m V^{(2m-1)}(0) + coef Int V = Int f(V)
  const double boundary = ((m % 2 == 0) ? 1.0 : -1.0) * profile.value(0, 2 * m - 1);
  const double half_scale =
      std::max({1.0, std::abs(coef * iv_half), std::abs(if_half), std::abs(boundary)});
  report.halfline_residual = std::abs(boundary + coef * iv_half - if_half) / half_scale;

  double iv_full, if_full;
  if (profile.parity == Parity::Even) {
    iv_full = 2.0 * iv_half;
    if_full = 2.0 * if_half;
  } else if (params.variant == Variant::Monotone) {
    iv_full = 0.0;  // odd integrand
    if_full = 0.0;
  } else {
    // the odd extension is not a solution for the non-monotone variant;
    // report the half-line residual as the mass residual
    report.mass_residual = report.halfline_residual;
    report.mass_ok = report.mass_residual <= kMassIdentityTol;
    return report;
  }
  const double scale = std::max({1.0, std::abs(coef * iv_full), std::abs(if_full)});
  report.mass_residual = std::abs(coef * iv_full - if_full) / scale;
  report.mass_ok = report.mass_residual <= kMassIdentityTol;
  return report;
}

IdentityReport pohozaev_check(const std::vector<double>& grid, const std::vector<double>& w,
                              double p) {
  if (grid.size() != w.size() || grid.size() < 5)
    throw std::invalid_argument("pohozaev_check: need at least five samples");
  IdentityReport report;
  report.pohozaev_evaluated = true;
  report.gamma0_value = gamma0(p);

  double wmax = 0.0;
  for (const double v : w) wmax = std::max(wmax, std::abs(v));
  if (wmax == 0.0) return report;  // trivial candidate: identities hold as 0 = 0
  if (std::abs(w.back()) > 1e-2 * wmax)
    throw std::invalid_argument("pohozaev_check: candidate does not decay at the window end");

  const size_t n = grid.size();
  std::vector<double> w2(n, 0.0);
  for (size_t i = 1; i + 1 < n; ++i) {
    const double hl = grid[i] - grid[i - 1];
    const double hr = grid[i + 1] - grid[i];
    w2[i] = 2.0 * ((w[i + 1] - w[i]) / hr - (w[i] - w[i - 1]) / hl) / (hl + hr);
  }
  w2[0] = w2[1];
  w2[n - 1] = w2[n - 2];

  std::vector<double> sq(n), curv(n), pw(n);
  for (size_t i = 0; i < n; ++i) {
    sq[i] = w[i] * w[i];
    curv[i] = w2[i] * w2[i];
    pw[i] = std::pow(std::abs(w[i]), p + 1.0);
  }
  const double int_sq = trapezoid(grid, sq);
  const double int_curv = trapezoid(grid, curv);
  const double int_pw = trapezoid(grid, pw);

  report.lhs1 = -int_curv + int_sq - int_pw;
  report.lhs2 = -1.5 * int_curv - 0.5 * int_sq + int_pw / (p + 1.0);
  report.ratio = (int_pw > 0.0) ? int_sq / int_pw : 0.0;
  return report;
}

}  // namespace vss
