#include "vss/branch.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <memory>
#include <stdexcept>
#include <thread>

namespace vss {

namespace {

ProblemParams with_param(ProblemParams base, BranchKind kind, double t) {
  if (kind == BranchKind::InP)
    base.p = t;
  else
    base.alpha = t;
  return base;
}

double param_of(const ProblemParams& params, BranchKind kind) {
  return kind == BranchKind::InP ? params.p : params.alpha;
}

double amplitude_floor_for(const ProblemParams& params, OdeForm form) {
  const double vplus = (form == OdeForm::ProfileOriginal) ? derive(params).v_plus : 1.0;
  return 1e-4 * std::max(1.0, vplus);
}

struct Metric {
  std::vector<double> weights;  // max(1, |c_i|) at the reference point

  double distance(double dt, const std::vector<double>& dc) const {
    double acc = dt * dt;
    for (size_t i = 0; i < dc.size(); ++i) {
      const double w = dc[i] / weights[i];
      acc += w * w;
    }
    return std::sqrt(acc);
  }
};

Metric metric_at(const std::vector<double>& c) {
  Metric m;
  m.weights.resize(c.size());
  for (size_t i = 0; i < c.size(); ++i) m.weights[i] = std::max(1.0, std::abs(c[i]));
  return m;
}

BranchPoint make_point(double t, const ProfileSolution& profile, double mass_residual) {
  BranchPoint pt;
  pt.param = t;
  pt.shooting_params = profile.shooting_params;
  pt.amplitude = profile.amplitude;
  pt.support_width = profile.support_width();
  pt.residual_norm = profile.residual_norm;
  pt.mass_residual = mass_residual;
  return pt;
}

ShootSpec spec_for(const StepControl& ctrl, const ProfileSolution& reference,
                   bool adaptive_length, double length_boost) {
  ShootSpec spec = ctrl.shoot;
  spec.parity = reference.parity;
  spec.form = reference.form;
  if (adaptive_length)
    spec.L = std::max(spec.L, std::max(26.0, 1.5 * reference.support_width() / 2.0 + 10.0));
  spec.L = std::min(240.0, spec.L * length_boost);
  return spec;
}

}  // namespace

std::string to_string(BranchEvent::Type type) {
  switch (type) {
    case BranchEvent::Type::TurningPoint: return "turning-point";
    case BranchEvent::Type::ZeroAmplitudeEnd: return "zero-amplitude-end";
    case BranchEvent::Type::ParamLimit: return "param-limit";
    case BranchEvent::Type::SolverLoss: return "solver-loss";
    case BranchEvent::Type::ClosedLoop: return "closed-loop";
    case BranchEvent::Type::Anomaly: return "anomaly";
  }
  return "unknown";
}

bool Branch::has_event(BranchEvent::Type type) const { return find_event(type) != nullptr; }

const BranchEvent* Branch::find_event(BranchEvent::Type type) const {
  for (const auto& e : events)
    if (e.type == type) return &e;
  return nullptr;
}

Branch continue_branch(const ProfileSolution& start, BranchKind kind, int direction,
                       const StepControl& ctrl) {
  if (start.grid.empty() || start.residual_norm > 10.0 * ctrl.shoot.newton.residual_tol)
    throw std::invalid_argument("continue_branch: start point is not converged");
  Branch branch;
  branch.kind = kind;
  branch.parity = start.parity;
  branch.base_params = start.params;
  branch.fixed_param = (kind == BranchKind::InP) ? start.params.alpha : start.params.p;

  double param_min = ctrl.param_min;
  if (kind == BranchKind::InP) param_min = std::max(param_min, 1.01);

  auto mass_of = [](const ProfileSolution& prof) {
    return mass_identity(prof).mass_residual;
  };

  ProfileSolution cur = start;
  double t_cur = param_of(start.params, kind);
  branch.points.push_back(make_point(t_cur, cur, mass_of(cur)));

  std::vector<double> pending_checkpoints = ctrl.checkpoints;
  std::sort(pending_checkpoints.begin(), pending_checkpoints.end());

  double length_boost = 1.0;  // grows when the finite-L mass residual bites

  auto solve_fixed = [&](double t, const std::vector<double>& guess,
                         const ProfileSolution& warm) -> SolveResult {
    ShootSpec spec = spec_for(ctrl, warm, ctrl.adaptive_length, length_boost);
    spec.free_params = guess;
    return solve_profile(with_param(warm.params, kind, t), spec, &warm, nullptr);
  };

  auto handle_checkpoints = [&](double t_prev, double t_new, const ProfileSolution& warm) {
    for (const double q : pending_checkpoints) {
      const bool crossed = (t_prev < q && q <= t_new) || (t_new <= q && q < t_prev);
      if (!crossed && std::abs(q - t_new) > 1e-12) continue;
      if (branch.checkpoint_profiles.count(q)) continue;
      SolveResult res = solve_fixed(q, warm.shooting_params, warm);
      if (res.ok()) {
        branch.checkpoint_profiles.emplace(q, std::move(*res.profile));
      } else {
        branch.events.push_back({BranchEvent::Type::Anomaly, q, -1,
                                 "checkpoint solve failed: " + to_string(res.status)});
      }
    }
  };

  // second point by a short natural-parameter step
  ProfileSolution prev;
  double t_prev = t_cur;
  {
    double dt = direction * std::max(ctrl.ds_init, 4.0 * ctrl.ds_min);
    bool ok = false;
    for (int attempt = 0; attempt < 24 && !ok; ++attempt, dt *= 0.5) {
      const double t_try = t_cur + dt;
      if (t_try <= param_min || t_try >= ctrl.param_max) continue;
      SolveResult res = solve_fixed(t_try, cur.shooting_params, cur);
      if (!res.ok()) continue;
      prev = cur;
      t_prev = t_cur;
      cur = std::move(*res.profile);
      t_cur = t_try;
      branch.points.push_back(make_point(t_cur, cur, mass_of(cur)));
      handle_checkpoints(t_prev, t_cur, cur);
      ok = true;
    }
    if (!ok) {
      branch.events.push_back(
          {BranchEvent::Type::SolverLoss, t_cur, -1, "no second point: immediate corrector failure"});
      branch.last_profile = cur;
      return branch;
    }
  }

  const BranchPoint start_point = branch.points.front();
  const Metric start_metric = metric_at(start_point.shooting_params);

  double ds = ctrl.ds_init;
  int prev_dt_sign = (t_cur - t_prev) > 0 ? 1 : -1;

  while (static_cast<int>(branch.points.size()) < ctrl.max_points) {
    const Metric metric = metric_at(cur.shooting_params);
    std::vector<double> dc(cur.shooting_params.size());
    for (size_t i = 0; i < dc.size(); ++i)
      dc[i] = cur.shooting_params[i] - prev.shooting_params[i];
    const double dt_last = t_cur - t_prev;
    const double ds_prev = std::max(metric.distance(dt_last, dc), 1e-14);

    const double f = ds / ds_prev;
    const double t_pred = t_cur + f * dt_last;
    std::vector<double> c_pred(dc.size());
    for (size_t i = 0; i < dc.size(); ++i) c_pred[i] = cur.shooting_params[i] + f * dc[i];

    // parameter window
    if (t_pred <= param_min || t_pred >= ctrl.param_max) {
      const double t_limit = (t_pred <= param_min) ? param_min : ctrl.param_max;
      SolveResult res = solve_fixed(t_limit, cur.shooting_params, cur);
      if (res.ok()) {
        const ProfileSolution& prof = *res.profile;
        branch.points.push_back(make_point(t_limit, prof, mass_of(prof)));
        handle_checkpoints(t_cur, t_limit, prof);
        prev = cur;
        cur = std::move(*res.profile);
        t_prev = t_cur;
        t_cur = t_limit;
      }
      branch.events.push_back({BranchEvent::Type::ParamLimit, t_limit, -1, ""});
      break;
    }

    ContinuationCoupling coupling;
    coupling.which = (kind == BranchKind::InP) ? ContinuationCoupling::Which::P
                                               : ContinuationCoupling::Which::Alpha;
    coupling.param_init = t_pred;
    coupling.param_pred = t_pred;
    coupling.c_pred = c_pred;
    coupling.weight_param = dt_last / ds_prev;
    coupling.weight_c.resize(dc.size());
    for (size_t i = 0; i < dc.size(); ++i)
      coupling.weight_c[i] = dc[i] / (metric.weights[i] * metric.weights[i] * ds_prev);

    ShootSpec spec = spec_for(ctrl, cur, ctrl.adaptive_length, length_boost);
    spec.free_params = c_pred;
    SolveResult res =
        solve_profile(with_param(cur.params, kind, t_pred), spec, &cur, &coupling);

    bool reject = !res.ok();
    std::string reject_note;
    double t_new = 0.0;
    if (res.ok()) {
      t_new = coupling.param_out;
      // guard against jumps to a different branch
      std::vector<double> dc_new(dc.size());
      for (size_t i = 0; i < dc.size(); ++i)
        dc_new[i] = res.profile->shooting_params[i] - cur.shooting_params[i];
      const double moved = metric.distance(t_new - t_cur, dc_new);
      if (moved > 6.0 * ds + 1e-9) {
        reject = true;
        reject_note = "corrector jumped";
      } else if (ctrl.enforce_mass_identity) {
        const double mres = mass_of(*res.profile);
        if (mres > kMassIdentityTol) {
          // a truncation-length problem, not a step-size one
          if (length_boost < 8.0) {
            length_boost *= 1.25;
            continue;
          }
          reject = true;
          reject_note = "mass identity violated";
        }
      }
    } else if (res.status == SolveStatus::TrivialSolution &&
               cur.amplitude < 20.0 * amplitude_floor_for(cur.params, cur.form)) {
      // the branch ran into the zero solution: treat as the branch end
      const double a_prev = std::pow(prev.amplitude, cur.params.p - 1.0);
      const double a_cur = std::pow(cur.amplitude, cur.params.p - 1.0);
      double t_end = t_cur;
      if (a_prev > a_cur && std::abs(t_cur - t_prev) > 0.0)
        t_end = t_cur + (t_cur - t_prev) * a_cur / (a_prev - a_cur);
      branch.events.push_back({BranchEvent::Type::ZeroAmplitudeEnd, t_end, -1, ""});
      break;
    }

    if (reject) {
      ds *= 0.5;
      if (ds < ctrl.ds_min) {
        branch.events.push_back({BranchEvent::Type::SolverLoss, t_cur, -1,
                                 reject_note.empty() ? to_string(res.status) : reject_note});
        break;
      }
      continue;
    }

    const double dt_new = t_new - t_cur;
    const int dt_sign = (dt_new > 0) ? 1 : (dt_new < 0 ? -1 : prev_dt_sign);
    if (dt_sign != prev_dt_sign && std::abs(dt_new) > ctrl.turning_refine &&
        ds > 4.0 * ctrl.ds_min) {
      ds *= 0.5;  // localize the fold before accepting the reversal
      continue;
    }

    // accept
    if (dt_sign != prev_dt_sign) {
      branch.events.push_back({BranchEvent::Type::TurningPoint, t_cur, -1, ""});
    }
    prev_dt_sign = dt_sign;
    prev = cur;
    t_prev = t_cur;
    cur = std::move(*res.profile);
    t_cur = t_new;
    const double mres = mass_of(cur);
    branch.points.push_back(make_point(t_cur, cur, mres));
    handle_checkpoints(t_prev, t_cur, cur);

    // termination: amplitude collapse
    const double floor = amplitude_floor_for(cur.params, cur.form);
    if (cur.amplitude < floor) {
      const double a_prev = std::pow(prev.amplitude, cur.params.p - 1.0);
      const double a_cur = std::pow(cur.amplitude, cur.params.p - 1.0);
      double t_end = t_cur;
      if (a_prev > a_cur) t_end = t_cur + (t_cur - t_prev) * a_cur / (a_prev - a_cur);
      branch.events.push_back({BranchEvent::Type::ZeroAmplitudeEnd, t_end, -1, ""});
      break;
    }

    // termination: closed loop
    if (static_cast<int>(branch.points.size()) > ctrl.min_loop_steps) {
      std::vector<double> dc0(cur.shooting_params.size());
      for (size_t i = 0; i < dc0.size(); ++i)
        dc0[i] = cur.shooting_params[i] - start_point.shooting_params[i];
      if (start_metric.distance(t_cur - start_point.param, dc0) < ctrl.loop_tol) {
        branch.events.push_back({BranchEvent::Type::ClosedLoop, t_cur, -1, ""});
        break;
      }
    }

    ds = std::min(ds * 1.7, ctrl.ds_max);
  }

  if (static_cast<int>(branch.points.size()) >= ctrl.max_points)
    branch.events.push_back({BranchEvent::Type::Anomaly, t_cur, -1, "point budget exhausted"});

  // resolve zero-amplitude endpoints against the bifurcation exponents
  if (branch.has_event(BranchEvent::Type::ZeroAmplitudeEnd)) {
    const auto matched = match_endpoint(branch);
    for (auto& e : branch.events) {
      if (e.type == BranchEvent::Type::ZeroAmplitudeEnd) {
        if (matched) {
          e.matched_l = *matched;
        } else {
          branch.events.push_back({BranchEvent::Type::Anomaly, e.param, -1,
                                   "endpoint matches no bifurcation exponent"});
        }
        break;
      }
    }
  }

  branch.last_profile = cur;
  return branch;
}

std::vector<double> detect_turning_points(const Branch& branch) {
  std::vector<double> folds;
  const auto& pts = branch.points;
  if (pts.size() < 3) return folds;
  int prev_sign = 0;
  for (size_t i = 1; i < pts.size(); ++i) {
    const double dt = pts[i].param - pts[i - 1].param;
    const int sign = (dt > 0) ? 1 : (dt < 0 ? -1 : 0);
    if (sign == 0) continue;
    if (prev_sign != 0 && sign != prev_sign) {
      // parabola through the three surrounding points in (index, param)
      const double t0 = pts[i - 2].param, t1 = pts[i - 1].param, t2 = pts[i].param;
      const double denom = t0 - 2.0 * t1 + t2;
      double fold = t1;
      if (std::abs(denom) > 1e-300) {
        const double shift = 0.5 * (t0 - t2) / denom;
        // vertex of the interpolating parabola, clamped to the bracket
        const double lo = std::min({t0, t1, t2}), hi = std::max({t0, t1, t2});
        double v = t1 - 0.25 * (t0 - t2) * shift;
        fold = std::clamp(v, lo, hi);
      }
      folds.push_back(fold);
    }
    prev_sign = sign;
  }
  return folds;
}

CensusResult sweep_profile_census(const ProblemParams& target, const CensusOptions& options) {
  target.validate();
  CensusResult result;

  std::vector<int> eligible;
  if (options.use_bifurcation_seeds) {
    for (int l = (options.parity == Parity::Even) ? 0 : 1; l <= options.l_max; l += 2) {
      const double al = critical_alpha(l, target.m, target.N, target.p);
      if (al + 0.5 * options.seed_offset < target.alpha)
        eligible.push_back(l);
      else
        break;  // alpha_l increases with l
    }
  }

  std::shared_ptr<const KernelTable> kernel;
  if (!eligible.empty()) {
    int l_kernel = 0;
    for (const int l : eligible) l_kernel = std::max(l_kernel, std::min(l, 24));
    kernel = shared_kernel(target.m, l_kernel);
  }

  auto run_bifurcation_seed = [&, kernel](int l) -> CensusRecord {
    CensusRecord rec;
    rec.l = l;
    const double al = critical_alpha(l, target.m, target.N, target.p);
    double delta = options.seed_offset;
    for (int attempt = 0; attempt < 4; ++attempt, delta *= 0.5) {
      ProblemParams seed_params = target;
      seed_params.alpha = al + delta;
      std::vector<double> seed;
      try {
        seed = seed_from_bifurcation(l, target.p, seed_params, *kernel);
      } catch (const std::exception& e) {
        rec.note = e.what();
        continue;
      }
      rec.seed = seed;
      ShootSpec spec = options.step.shoot;
      spec.parity = options.parity;
      spec.free_params = seed;
      SolveResult res = solve_profile(seed_params, spec);
      if (!res.ok()) {
        rec.status = res.status;
        rec.note = "seed solve: " + res.message;
        continue;
      }
      StepControl ctrl = options.step;
      ctrl.param_max = target.alpha;
      ctrl.param_min = std::max(ctrl.param_min, al - 0.5);
      Branch branch = continue_branch(*res.profile, BranchKind::InAlpha, +1, ctrl);
      const BranchEvent* limit = branch.find_event(BranchEvent::Type::ParamLimit);
      if (limit && branch.last_profile &&
          std::abs(branch.last_profile->params.alpha - target.alpha) < 1e-9) {
        rec.status = SolveStatus::Converged;
        rec.profile = branch.last_profile;
        rec.taxonomy = classify_profile(*rec.profile);
        return rec;
      }
      rec.status = SolveStatus::NewtonDiverged;
      std::string trail;
      for (const auto& e : branch.events) trail += to_string(e.type) + " ";
      rec.note = "continuation ended before target: " + trail;
      return rec;
    }
    if (rec.note.empty()) rec.note = "no converged seed near the bifurcation point";
    return rec;
  };

  auto run_direct_seed = [&](const std::vector<double>& seed) -> CensusRecord {
    CensusRecord rec;
    rec.seed = seed;
    ShootSpec spec = options.step.shoot;
    spec.parity = options.parity;
    spec.free_params = seed;
    SolveResult res = solve_profile(target, spec);
    rec.status = res.status;
    if (res.ok()) {
      rec.profile = std::move(res.profile);
      rec.taxonomy = classify_profile(*rec.profile);
    } else {
      rec.note = res.message;
    }
    return rec;
  };

  // independent seeds may run concurrently
  const int threads = options.threads > 0
                          ? options.threads
                          : std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::function<CensusRecord()>> jobs;
  for (const int l : eligible)
    jobs.push_back([&run_bifurcation_seed, l] { return run_bifurcation_seed(l); });
  for (const auto& seed : options.extra_seeds)
    jobs.push_back([&run_direct_seed, seed] { return run_direct_seed(seed); });

  result.records.resize(jobs.size());
  for (size_t begin = 0; begin < jobs.size(); begin += static_cast<size_t>(threads)) {
    const size_t end = std::min(jobs.size(), begin + static_cast<size_t>(threads));
    std::vector<std::future<CensusRecord>> batch;
    for (size_t i = begin; i < end; ++i)
      batch.push_back(std::async(std::launch::async, jobs[i]));
    for (size_t i = begin; i < end; ++i) result.records[i] = batch[i - begin].get();
  }

  // deduplicate accepted profiles
  for (size_t i = 0; i < result.records.size(); ++i) {
    CensusRecord& rec = result.records[i];
    if (rec.status != SolveStatus::Converged || !rec.profile) continue;
    bool duplicate = false;
    for (const size_t j : result.distinct) {
      const CensusRecord& other = result.records[j];
      const double a0 = other.profile->amplitude, a1 = rec.profile->amplitude;
      const double w0 = other.profile->support_width(), w1 = rec.profile->support_width();
      const bool amp_close = std::abs(a0 - a1) <= options.dedup_tol * std::max(1.0, std::abs(a0));
      const bool sup_close = std::abs(w0 - w1) <= options.dedup_tol * std::max(1.0, std::abs(w0));
      if (amp_close && sup_close &&
          other.taxonomy.dominant_extrema == rec.taxonomy.dominant_extrema) {
        duplicate = true;
        rec.note = "duplicate of record " + std::to_string(j);
        break;
      }
    }
    if (!duplicate) {
      rec.accepted = true;
      result.distinct.push_back(i);
    }
  }
  std::sort(result.distinct.begin(), result.distinct.end(), [&](size_t a, size_t b) {
    const CensusRecord& ra = result.records[a];
    const CensusRecord& rb = result.records[b];
    if (ra.taxonomy.basic_index != rb.taxonomy.basic_index)
      return ra.taxonomy.basic_index < rb.taxonomy.basic_index;
    return ra.profile->amplitude < rb.profile->amplitude;
  });
  return result;
}

std::optional<int> match_endpoint(const Branch& branch, double tol) {
  const BranchEvent* end = branch.find_event(BranchEvent::Type::ZeroAmplitudeEnd);
  if (!end) return std::nullopt;
  const double target = end->param;
  const int m = branch.base_params.m;
  const int N = branch.base_params.N;
  int best_l = -1;
  double best = tol;
  for (int l = (branch.parity == Parity::Even) ? 0 : 1; l <= 800; l += 2) {
    const double crit = (branch.kind == BranchKind::InP)
                            ? critical_p(l, m, N, branch.fixed_param)
                            : critical_alpha(l, m, N, branch.fixed_param);
    const double dist = std::abs(target - crit);
    if (dist < best) {
      best = dist;
      best_l = l;
    }
  }
  if (best_l < 0) return std::nullopt;
  return best_l;
}

}  // namespace vss
