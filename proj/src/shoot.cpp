#include "vss/shoot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "vss/linalg.hpp"

namespace vss {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const std::vector<double>& v) {
  double n = 0.0;
  for (const double x : v) n = std::max(n, std::abs(x));
  return n;
}

StateVector interpolate_state(const std::vector<double>& grid, const std::vector<double>& values,
                              int dim, double y) {
  const size_t n = grid.size();
  StateVector out(dim);
  if (n == 0) return out;
  if (y <= grid.front()) {
    for (int c = 0; c < dim; ++c) out[c] = values[static_cast<size_t>(c)];
    return out;
  }
  if (y >= grid.back()) {
    for (int c = 0; c < dim; ++c) out[c] = values[(n - 1) * dim + static_cast<size_t>(c)];
    return out;
  }
  const size_t b =
      static_cast<size_t>(std::upper_bound(grid.begin(), grid.end(), y) - grid.begin());
  const size_t a = b - 1;
  const double h = grid[b] - grid[a];
  const double t = (y - grid[a]) / h;
  for (int c = 0; c < dim; ++c) {
    const double va = values[a * dim + static_cast<size_t>(c)];
    const double vb = values[b * dim + static_cast<size_t>(c)];
    if (c + 1 < dim) {
      const double da = values[a * dim + static_cast<size_t>(c) + 1] * h;
      const double db = values[b * dim + static_cast<size_t>(c) + 1] * h;
      const double t2 = t * t, t3 = t2 * t;
      out[c] = (2 * t3 - 3 * t2 + 1) * va + (t3 - 2 * t2 + t) * da + (-2 * t3 + 3 * t2) * vb +
               (t3 - t2) * db;
    } else {
      out[c] = va + t * (vb - va);
    }
  }
  return out;
}

/// Local error-growth rate of the linearized profile equation, used to place
/// matching nodes so one segment never amplifies by more than e^gain.
double growth_rate(const ProblemParams& params, OdeForm form, double y) {
  const int m = params.m;
  const double b = beta(params);
  const double drift = (form == OdeForm::ProfileOriginal) ? 1.0 : 1.0 / b;
  const double eq_coef = (form == OdeForm::ProfileOriginal) ? b * (params.p - 1.0)
                                                            : (params.p - 1.0);
  const double rate_eq = std::pow(std::max(eq_coef, 1e-3), 1.0 / (2.0 * m));
  const double rate_tail =
      std::pow(drift * std::max(y, 1.0) / (2.0 * m), 1.0 / (2.0 * m - 1.0));
  return std::max({rate_eq, rate_tail, 0.3});
}

std::vector<double> choose_nodes(const ProblemParams& params, OdeForm form, double L,
                                 double gain, int max_segments) {
  std::vector<double> nodes{0.0};
  double acc = 0.0;
  const double dy = std::min(0.05, L / 64.0);
  for (double y = 0.0; y < L; y += dy) {
    acc += growth_rate(params, form, y) * dy;
    if (acc >= gain && L - y > 0.5) {
      nodes.push_back(y);
      acc = 0.0;
    }
  }
  nodes.push_back(L);
  while (static_cast<int>(nodes.size()) - 1 > max_segments) {
    // too many segments: drop every other interior node
    std::vector<double> thinned{0.0};
    for (size_t i = 1; i + 1 < nodes.size(); i += 2) thinned.push_back(nodes[i]);
    thinned.push_back(L);
    nodes.swap(thinned);
  }
  return nodes;
}

struct EvalOutcome {
  bool ok = false;
  std::vector<double> residual;
  std::vector<Trajectory> segments;
  double overflow_y = 0.0;
  IntegrateStatus fail_status = IntegrateStatus::Ok;
};

/// Multiple-shooting residual/Jacobian evaluator.  Unknown layout:
/// [param (optional)] [c_0..c_{m-1}] [s_1 .. s_{K-1}], each s_j of size 2m.
/// Residual rows: continuity blocks, terminal conditions, normalization row.
class Engine {
 public:
  Engine(const ProblemParams& params, const ShootSpec& spec, ContinuationCoupling* coupling)
      : base_params_(params), spec_(spec), coupling_(coupling) {
    m_ = params.m;
    dim_ = 2 * m_;
    nodes_ = choose_nodes(params, spec.form, spec.L, spec.segment_gain, spec.max_segments);
    K_ = static_cast<int>(nodes_.size()) - 1;
    extra_ = coupling ? 1 : 0;
    n_ = extra_ + m_ + dim_ * (K_ - 1);
    seg_cfg_ = spec.config;
    const double vp = derive(params).v_plus;
    amp_scale_ = (spec.form == OdeForm::ProfileOriginal) ? std::max(1.0, vp) : 1.0;
    seg_cfg_.overflow_guard = spec.config.overflow_guard * amp_scale_;
    fd_cfg_ = seg_cfg_;
    fd_cfg_.dense_step = spec.L;  // endpoints only
    comp_scale_.assign(static_cast<size_t>(dim_), 1.0);
  }

  int unknowns() const { return n_; }
  int segments() const { return K_; }
  const std::vector<double>& nodes() const { return nodes_; }
  double amplitude_scale() const { return amp_scale_; }

  ProblemParams params_for(const std::vector<double>& x) const {
    ProblemParams p = base_params_;
    if (coupling_) {
      if (coupling_->which == ContinuationCoupling::Which::P)
        p.p = x[0];
      else
        p.alpha = x[0];
    }
    return p;
  }

  std::vector<double> pack_initial(const std::vector<double>& free_params,
                                   const ProfileSolution* warm) const {
    std::vector<double> x(static_cast<size_t>(n_), 0.0);
    int at = 0;
    if (coupling_) x[static_cast<size_t>(at++)] = coupling_->param_init;
    for (int i = 0; i < m_; ++i) x[static_cast<size_t>(at++)] = free_params[static_cast<size_t>(i)];
    if (K_ == 1) return x;
    if (warm && !warm->grid.empty()) {
      for (int j = 1; j < K_; ++j) {
        const double yj = nodes_[static_cast<size_t>(j)];
        // past the warm profile's reach the tail is effectively zero
        const bool covered = yj <= warm->grid.back() + 1e-9;
        const StateVector s = covered ? warm->state_at(yj) : StateVector(dim_);
        for (int c = 0; c < dim_; ++c) x[static_cast<size_t>(at++)] = s[c];
      }
      return x;
    }
    // self-seed: march the seed forward, zeroing nodes once the trajectory
    // stops looking like a decaying profile (the growing mode poisons it)
    ProblemParams p = params_for(x);
    double guess_norm = 0.0;
    for (const double c : free_params) guess_norm = std::max(guess_norm, std::abs(c));
    const double cap = 10.0 * std::max({1.0, amp_scale_, guess_norm});
    StateVector s = initial_state(spec_.parity, free_params, m_);
    bool alive = true;
    for (int j = 1; j < K_; ++j) {
      if (alive) {
        const Trajectory t = integrate(spec_.form, p, nodes_[static_cast<size_t>(j - 1)],
                                       nodes_[static_cast<size_t>(j)], s, fd_cfg_);
        if (t.reached_end() && t.final_state.max_abs() <= cap) {
          s = t.final_state;
        } else {
          alive = false;
        }
      }
      for (int c = 0; c < dim_; ++c)
        x[static_cast<size_t>(at++)] = alive ? s[c] : 0.0;
    }
    return x;
  }

  /// Residual scales from the warm-start unknowns: the node states carry the
  /// intended solution magnitudes, unlike transient shot trajectories.
  void set_scales(const std::vector<double>& x) {
    std::vector<double> cmax(static_cast<size_t>(dim_), 0.0);
    for (int i = 0; i < m_; ++i) {
      const int slot = (spec_.parity == Parity::Even) ? 2 * i : 2 * i + 1;
      cmax[static_cast<size_t>(slot)] =
          std::max(cmax[static_cast<size_t>(slot)], std::abs(x[static_cast<size_t>(extra_ + i)]));
    }
    for (int j = 1; j < K_; ++j)
      for (int c = 0; c < dim_; ++c)
        cmax[static_cast<size_t>(c)] = std::max(
            cmax[static_cast<size_t>(c)], std::abs(x[static_cast<size_t>(state_col(j) + c)]));
    for (int c = 0; c < dim_; ++c)
      comp_scale_[static_cast<size_t>(c)] = std::max(1.0, cmax[static_cast<size_t>(c)]);
    profile_scale_ = comp_scale_[0];
  }

  EvalOutcome eval(const std::vector<double>& x, bool dense) {
    EvalOutcome out;
    ProblemParams p = params_for(x);
    if (!(p.p > 1.0) || !(p.alpha > -1.0)) return out;  // invalid trial
    const RhsFn rhs = make_rhs(spec_.form, p);
    out.segments.resize(static_cast<size_t>(K_));
    std::vector<StateVector> ends(static_cast<size_t>(K_));
    for (int j = 0; j < K_; ++j) {
      const StateVector init = node_state(x, j);
      const Trajectory t = integrate(rhs, dim_, nodes_[static_cast<size_t>(j)],
                                     nodes_[static_cast<size_t>(j + 1)], init,
                                     dense ? seg_cfg_ : fd_cfg_);
      if (!t.reached_end()) {
        out.fail_status = t.status;
        out.overflow_y = t.y_stop;
        return out;
      }
      ends[static_cast<size_t>(j)] = t.final_state;
      out.segments[static_cast<size_t>(j)] = t;
    }
    out.residual.assign(static_cast<size_t>(n_), 0.0);
    int row = 0;
    for (int j = 0; j + 1 < K_; ++j) {
      const StateVector& e = ends[static_cast<size_t>(j)];
      for (int c = 0; c < dim_; ++c) {
        const double target = x[static_cast<size_t>(state_col(j + 1) + c)];
        out.residual[static_cast<size_t>(row++)] =
            (e[c] - target) / comp_scale_[static_cast<size_t>(c)];
      }
    }
    const StateVector& last = ends[static_cast<size_t>(K_ - 1)];
    for (int c = 0; c < m_; ++c)
      out.residual[static_cast<size_t>(row++)] = last[c] / profile_scale_;
    if (coupling_) {
      double norm_row = coupling_->weight_param * (x[0] - coupling_->param_pred);
      for (int i = 0; i < m_; ++i)
        norm_row += coupling_->weight_c[static_cast<size_t>(i)] *
                    (x[static_cast<size_t>(extra_ + i)] - coupling_->c_pred[static_cast<size_t>(i)]);
      out.residual[static_cast<size_t>(row++)] = norm_row;
    }
    out.ok = true;
    return out;
  }

  /// One segment, endpoints only; used for finite-difference columns.
  bool eval_segment(const std::vector<double>& x, int j, StateVector& end) {
    const ProblemParams p = params_for(x);
    if (!(p.p > 1.0) || !(p.alpha > -1.0)) return false;
    const RhsFn rhs = make_rhs(spec_.form, p);
    const Trajectory t = integrate(rhs, dim_, nodes_[static_cast<size_t>(j)],
                                   nodes_[static_cast<size_t>(j + 1)], node_state(x, j), fd_cfg_);
    if (!t.reached_end()) return false;
    end = t.final_state;
    return true;
  }

  bool jacobian(const std::vector<double>& x, const EvalOutcome& base, DenseMatrix& J) {
    J = DenseMatrix(n_, n_);
    const double fd = spec_.newton.jacobian_fd_step;
    // analytic parts: -I blocks for interior states, normalization row
    for (int j = 1; j < K_; ++j) {
      for (int c = 0; c < dim_; ++c) {
        const int row = (j - 1) * dim_ + c;
        J.at(row, state_col(j) + c) = -1.0 / comp_scale_[static_cast<size_t>(c)];
      }
    }
    if (coupling_) {
      const int row = n_ - 1;
      J.at(row, 0) = coupling_->weight_param;
      for (int i = 0; i < m_; ++i)
        J.at(row, extra_ + i) = coupling_->weight_c[static_cast<size_t>(i)];
    }
    // finite-difference columns
    std::vector<double> xp = x;
    StateVector end(dim_);
    if (coupling_) {
      const double h = fd * (1.0 + std::abs(x[0]));
      xp[0] = x[0] + h;
      for (int j = 0; j < K_; ++j) {
        if (!eval_segment(xp, j, end)) return false;
        fill_segment_rows(j, end, base, h, 0, J);
      }
      xp[0] = x[0];
    }
    for (int i = 0; i < m_; ++i) {
      const int col = extra_ + i;
      const double h = fd * (1.0 + std::abs(x[static_cast<size_t>(col)]));
      xp[static_cast<size_t>(col)] = x[static_cast<size_t>(col)] + h;
      if (!eval_segment(xp, 0, end)) return false;
      fill_segment_rows(0, end, base, h, col, J);
      xp[static_cast<size_t>(col)] = x[static_cast<size_t>(col)];
    }
    for (int j = 1; j < K_; ++j) {
      for (int c = 0; c < dim_; ++c) {
        const int col = state_col(j) + c;
        const double h = fd * (1.0 + std::abs(x[static_cast<size_t>(col)]));
        xp[static_cast<size_t>(col)] = x[static_cast<size_t>(col)] + h;
        if (!eval_segment(xp, j, end)) return false;
        fill_segment_rows(j, end, base, h, col, J);
        xp[static_cast<size_t>(col)] = x[static_cast<size_t>(col)];
      }
    }
    return true;
  }

 private:
  int state_col(int j) const { return extra_ + m_ + (j - 1) * dim_; }

  StateVector node_state(const std::vector<double>& x, int j) const {
    if (j == 0) {
      std::vector<double> c(static_cast<size_t>(m_));
      for (int i = 0; i < m_; ++i) c[static_cast<size_t>(i)] = x[static_cast<size_t>(extra_ + i)];
      return initial_state(spec_.parity, c, m_);
    }
    StateVector s(dim_);
    for (int c = 0; c < dim_; ++c) s[c] = x[static_cast<size_t>(state_col(j) + c)];
    return s;
  }

  void fill_segment_rows(int j, const StateVector& end_perturbed, const EvalOutcome& base,
                         double h, int col, DenseMatrix& J) const {
    const StateVector& end_base = base.segments[static_cast<size_t>(j)].final_state;
    if (j + 1 < K_) {
      for (int c = 0; c < dim_; ++c) {
        const int row = j * dim_ + c;
        J.at(row, col) += (end_perturbed[c] - end_base[c]) /
                          (h * comp_scale_[static_cast<size_t>(c)]);
      }
    } else {
      const int row0 = (K_ - 1) * dim_;
      for (int c = 0; c < m_; ++c)
        J.at(row0 + c, col) += (end_perturbed[c] - end_base[c]) / (h * profile_scale_);
    }
  }

  ProblemParams base_params_;
  ShootSpec spec_;
  ContinuationCoupling* coupling_ = nullptr;
  int m_ = 0, dim_ = 0, K_ = 0, extra_ = 0, n_ = 0;
  std::vector<double> nodes_;
  IntegratorConfig seg_cfg_, fd_cfg_;
  double amp_scale_ = 1.0;
  double profile_scale_ = 1.0;
  std::vector<double> comp_scale_;
};

ProfileSolution assemble_profile(const ProblemParams& params, const ShootSpec& spec,
                                 const std::vector<double>& c, const EvalOutcome& eval,
                                 double residual_norm) {
  ProfileSolution sol;
  sol.params = params;
  sol.parity = spec.parity;
  sol.form = spec.form;
  sol.L = spec.L;
  sol.shooting_params = c;
  sol.residual_norm = residual_norm;
  const int dim = 2 * params.m;
  // strictly uniform grid: the trapezoid rules downstream rely on the
  // Euler-Maclaurin cancellation a mixed step/dense grid would break
  const double h = spec.config.dense_step;
  const long n = std::lround(spec.L / h);
  size_t seg = 0;
  for (long k = 0; k <= n; ++k) {
    const double y = std::min(spec.L, k * h);
    while (seg + 1 < eval.segments.size() && y > eval.segments[seg].y_end + 1e-12) ++seg;
    const StateVector s = eval.segments[seg].state_at(y);
    sol.grid.push_back(y);
    for (int comp = 0; comp < dim; ++comp) sol.values.push_back(s[comp]);
  }
  if (spec.parity == Parity::Even) {
    sol.amplitude = std::abs(sol.values.empty() ? 0.0 : sol.values[0]);
  } else {
    sol.amplitude = sol.max_abs();
  }
  sol.tail = classify_decay(sol.grid, component_view(sol), params.m, params.p);
  return sol;
}

}  // namespace

std::vector<double> component_view(const ProfileSolution& sol) {
  std::vector<double> v(sol.grid.size());
  for (size_t i = 0; i < sol.grid.size(); ++i) v[i] = sol.value(i, 0);
  return v;
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::NewtonDiverged: return "newton-diverged";
    case SolveStatus::BlowupInShot: return "blowup-in-shot";
    case SolveStatus::TrivialSolution: return "trivial-solution";
    case SolveStatus::AlgebraicTail: return "algebraic-tail";
    case SolveStatus::IntegratorFailure: return "integrator-failure";
    case SolveStatus::BadInput: return "bad-input";
  }
  return "unknown";
}

std::string to_string(TailKind kind) {
  switch (kind) {
    case TailKind::Exponential: return "exponential";
    case TailKind::Algebraic: return "algebraic";
    case TailKind::Undetermined: return "undetermined";
  }
  return "unknown";
}

StateVector initial_state(Parity parity, const std::vector<double>& free_params, int m) {
  if (static_cast<int>(free_params.size()) != m)
    throw std::invalid_argument("initial_state: expected m free parameters");
  StateVector s(2 * m);
  for (int i = 0; i < m; ++i) {
    const int slot = (parity == Parity::Even) ? 2 * i : 2 * i + 1;
    s[slot] = free_params[static_cast<size_t>(i)];
  }
  return s;
}

std::vector<double> terminal_residual(const Trajectory& traj, double L, int m, double scale) {
  if (!traj.reached_end() || traj.y_stop < L - 1e-9) {
    throw std::runtime_error("terminal_residual: trajectory truncated at y = " +
                             std::to_string(traj.y_stop));
  }
  if (scale <= 0.0) {
    double vmax = 0.0;
    for (size_t i = 0; i < traj.size(); ++i) vmax = std::max(vmax, std::abs(traj.value(i, 0)));
    scale = std::max(1.0, vmax);
  }
  std::vector<double> r(static_cast<size_t>(m));
  for (int c = 0; c < m; ++c) r[static_cast<size_t>(c)] = traj.final_state[c] / scale;
  return r;
}

StateVector ProfileSolution::state_at(double y) const {
  const int d = dim();
  if (y >= 0.0) return interpolate_state(grid, values, d, y);
  StateVector s = interpolate_state(grid, values, d, -y);
  // symmetric extension: V^{(c)}(-y) = +-(-1)^c V^{(c)}(y)
  for (int c = 0; c < d; ++c) {
    const bool flip = (parity == Parity::Even) ? (c % 2 == 1) : (c % 2 == 0);
    if (flip) s[c] = -s[c];
  }
  return s;
}

double ProfileSolution::max_abs() const {
  double m = 0.0;
  for (size_t i = 0; i < grid.size(); ++i) m = std::max(m, std::abs(value(i, 0)));
  return m;
}

double ProfileSolution::support_width(double frac) const {
  const double m = max_abs();
  if (m <= 0.0) return 0.0;
  const double threshold = frac * m;
  for (size_t i = grid.size(); i-- > 0;) {
    if (std::abs(value(i, 0)) >= threshold) return 2.0 * grid[i];
  }
  return 0.0;
}

namespace {

DecayEstimate classify_decay_window(const std::vector<double>& grid,
                                    const std::vector<double>& v, int m, double p,
                                    double window_lo_frac, double window_hi_frac);

}  // namespace

DecayEstimate classify_decay(const std::vector<double>& grid, const std::vector<double>& v,
                             int m, double p, double window_lo_frac, double window_hi_frac) {
  DecayEstimate est = classify_decay_window(grid, v, m, p, window_lo_frac, window_hi_frac);
  if (est.kind == TailKind::Undetermined && est.fit_residual == 0.0) {
    // too few envelope extrema in the nominal window: widen once
    est = classify_decay_window(grid, v, m, p, 0.42, 0.98);
  }
  return est;
}

namespace {

DecayEstimate classify_decay_window(const std::vector<double>& grid,
                                    const std::vector<double>& v, int m, double p,
                                    double window_lo_frac, double window_hi_frac) {
  DecayEstimate est;
  if (grid.size() != v.size() || grid.size() < 8) return est;
  double vmax = 0.0;
  for (const double x : v) vmax = std::max(vmax, std::abs(x));
  if (vmax <= 0.0) return est;
  const double noise = 1e-11 * vmax;

  double y_hi = grid.back();
  for (size_t i = grid.size(); i-- > 0;) {
    if (std::abs(v[i]) >= 50.0 * noise) {
      y_hi = grid[i];
      break;
    }
  }
  const double lo = window_lo_frac * y_hi;
  const double hi = window_hi_frac * y_hi;
  est.fit_lo = lo;
  est.fit_hi = hi;

  std::vector<double> ey, ev;
  int sign_changes = 0;
  double prev_signed = 0.0;
  for (size_t i = 1; i + 1 < grid.size(); ++i) {
    if (grid[i] < lo || grid[i] > hi) continue;
    const double a = std::abs(v[i]);
    if (a >= std::abs(v[i - 1]) && a >= std::abs(v[i + 1]) && a > 10.0 * noise) {
      ey.push_back(grid[i]);
      ev.push_back(a);
    }
    if (v[i] != 0.0) {
      if (prev_signed != 0.0 && (v[i] < 0.0) != (prev_signed < 0.0)) ++sign_changes;
      prev_signed = v[i];
    }
  }
  est.tail_sign_changes = sign_changes;
  if (ey.size() < 4) return est;

  const double gamma = 2.0 * m / (2.0 * m - 1.0);
  std::vector<double> ones(ey.size(), 1.0), xs_exp(ey.size()), xs_alg(ey.size()),
      logs(ey.size());
  for (size_t i = 0; i < ey.size(); ++i) {
    xs_exp[i] = -std::pow(ey[i], gamma);
    xs_alg[i] = std::log(ey[i]);
    logs[i] = std::log(ev[i]);
  }
  auto fit = [&](const std::vector<double>& xs, double& slope) {
    std::vector<double> coef;
    if (!least_squares({ones, xs}, logs, coef)) return kInf;
    slope = coef[1];
    double rss = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
      const double r = logs[i] - coef[0] - coef[1] * xs[i];
      rss += r * r;
    }
    return std::sqrt(rss / xs.size());
  };
  double rate_exp = 0.0, rate_alg = 0.0;
  const double res_exp = fit(xs_exp, rate_exp);
  const double res_alg = fit(xs_alg, rate_alg);

  if (res_exp <= res_alg) {
    est.fit_residual = res_exp;
    if (rate_exp > 0.0 && sign_changes >= 3) {
      est.kind = TailKind::Exponential;
      est.fitted_rate = rate_exp;
    }
  } else {
    est.fit_residual = res_alg;
    const double target = -2.0 * m / (p - 1.0);
    if (std::abs(rate_alg - target) <= 0.2 * std::abs(target)) {
      est.kind = TailKind::Algebraic;
      est.fitted_rate = rate_alg;
    }
  }
  return est;
}

}  // namespace

DecayEstimate classify_decay(const ProfileSolution& profile) {
  return classify_decay(profile.grid, component_view(profile), profile.params.m,
                        profile.params.p);
}

namespace {

/// Scaled-eigenfunction amplitude of the branch at p below p_l, with the
/// overall sign chosen so the stored branch has a positive leading value.
double bifurcation_amplitude(int l, double p, const ProblemParams& params,
                             const KernelTable& kernel) {
  const double pl = critical_p(l, params.m, params.N, params.alpha);
  if (!(p < pl))
    throw std::invalid_argument("seed_from_bifurcation: requires p below p_l = " +
                                std::to_string(pl));
  const double kap = kappa(l, p, kernel, params.variant);
  if (!(kap > 0.0))
    throw std::domain_error("seed_from_bifurcation: kappa_l <= 0, subcritical branch absent");
  const double chat = c_hat(l, p, params.alpha, params.m, params.N, kap);
  double amp = std::pow(chat * (pl - p), 1.0 / (p - 1.0));
  // sign of psi_l at the first parity-allowed slot
  const int offset = l % 2;
  const double lead = kernel_derivative(0.0, l + offset, kernel.m(), kernel.quadrature());
  const double sign_l = (l % 2 == 0) ? 1.0 : -1.0;
  if (params.variant == Variant::Monotone && sign_l * lead < 0.0) amp = -amp;
  return amp;
}

}  // namespace

std::vector<double> seed_from_bifurcation(int l, double p, const ProblemParams& params,
                                          const KernelTable& kernel) {
  if (l > kernel.l_max())
    throw std::invalid_argument("seed_from_bifurcation: kernel table lacks order " +
                                std::to_string(l));
  const double amp = bifurcation_amplitude(l, p, params, kernel);
  const int m = params.m;
  const int offset = l % 2;  // even l -> even derivatives, odd l -> odd ones
  const double norm = std::exp(-0.5 * std::lgamma(l + 1.0));
  const double sign_l = (l % 2 == 0) ? 1.0 : -1.0;
  std::vector<double> c(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    const int order = l + 2 * i + offset;
    const double f = kernel_derivative(0.0, order, m, kernel.quadrature());
    c[static_cast<size_t>(i)] = amp * sign_l * norm * f;
  }
  return c;
}

ProfileSolution bifurcation_guess(int l, double p, const ProblemParams& params,
                                  const KernelTable& kernel, double L, double grid_step) {
  if (l > kernel.l_max())
    throw std::invalid_argument("bifurcation_guess: kernel table lacks order " +
                                std::to_string(l));
  const double amp = bifurcation_amplitude(l, p, params, kernel);
  const int m = params.m;
  const int dim = 2 * m;
  const double norm = std::exp(-0.5 * std::lgamma(l + 1.0));
  const double sign_l = (l % 2 == 0) ? 1.0 : -1.0;

  ProfileSolution guess;
  guess.params = params;
  guess.params.p = p;
  guess.parity = (l % 2 == 0) ? Parity::Even : Parity::Odd;
  guess.form = OdeForm::ProfileOriginal;
  guess.L = L;
  const long n = std::lround(L / grid_step) + 1;
  guess.grid.resize(static_cast<size_t>(n));
  guess.values.resize(static_cast<size_t>(n) * dim);
  for (long i = 0; i < n; ++i) {
    const double y = std::min(L, i * grid_step);
    guess.grid[static_cast<size_t>(i)] = y;
    for (int j = 0; j < dim; ++j) {
      const double f = kernel_derivative(y, l + j, m, kernel.quadrature());
      guess.values[static_cast<size_t>(i) * dim + j] = amp * sign_l * norm * f;
    }
  }
  guess.shooting_params.resize(static_cast<size_t>(m));
  const int offset = l % 2;
  for (int i = 0; i < m; ++i)
    guess.shooting_params[static_cast<size_t>(i)] =
        guess.values[static_cast<size_t>(2 * i + offset)];
  guess.amplitude = std::abs(guess.parity == Parity::Even ? guess.values[0] : guess.max_abs());
  return guess;
}

SolveResult solve_profile(const ProblemParams& params, const ShootSpec& spec,
                          const ProfileSolution* warm, ContinuationCoupling* coupling) {
  SolveResult result;
  try {
    params.validate();
  } catch (const std::exception& e) {
    result.message = e.what();
    return result;
  }
  if (static_cast<int>(spec.free_params.size()) != params.m) {
    result.message = "free_params must have m entries";
    return result;
  }
  if (!(spec.L > 0.0)) {
    result.message = "L must be positive";
    return result;
  }
  for (const double c : spec.free_params) {
    if (!std::isfinite(c)) {
      result.message = "free_params must be finite";
      return result;
    }
  }
  if (coupling && static_cast<int>(coupling->weight_c.size()) != params.m) {
    result.message = "coupling weights must have m entries";
    return result;
  }

  Engine engine(params, spec, coupling);
  std::vector<double> x = engine.pack_initial(spec.free_params, warm);
  engine.set_scales(x);
  EvalOutcome base = engine.eval(x, true);
  if (!base.ok) {
    result.status = (base.fail_status == IntegrateStatus::Overflow) ? SolveStatus::BlowupInShot
                                                                    : SolveStatus::IntegratorFailure;
    result.overflow_y = base.overflow_y;
    result.message = "initial shot failed at y = " + std::to_string(base.overflow_y);
    return result;
  }

  double base_norm = inf_norm(base.residual);
  const NewtonOptions& newton = spec.newton;
  if (newton.trace) {
    std::fprintf(stderr, "[shoot] K=%d n=%d nodes:", engine.segments(), engine.unknowns());
    for (const double nd : engine.nodes()) std::fprintf(stderr, " %.3g", nd);
    std::fprintf(stderr, "\n[shoot] initial |R| = %.6e\n", base_norm);
  }
  int iter = 0;
  for (; iter < newton.max_iter && base_norm > newton.residual_tol; ++iter) {
    DenseMatrix J;
    if (!engine.jacobian(x, base, J)) {
      result.status = SolveStatus::NewtonDiverged;
      result.message = "jacobian evaluation failed";
      result.iterations = iter;
      return result;
    }
    std::vector<double> neg_r(base.residual.size());
    for (size_t i = 0; i < neg_r.size(); ++i) neg_r[i] = -base.residual[i];
    std::vector<double> delta;
    if (!lu_solve(J, neg_r, delta)) {
      result.status = SolveStatus::NewtonDiverged;
      result.message = "singular shooting jacobian";
      result.iterations = iter;
      return result;
    }
    // start below full Newton when the proposed step is out of proportion
    double max_rel = 0.0;
    for (size_t i = 0; i < delta.size(); ++i)
      max_rel = std::max(max_rel, std::abs(delta[i]) / std::max(1.0, std::abs(x[i])));
    const double lambda0 = std::min(1.0, 8.0 / std::max(max_rel, 1e-300));
    bool accepted = false;
    for (double lambda = lambda0; lambda >= lambda0 * newton.damping_min; lambda *= 0.5) {
      std::vector<double> xt = x;
      for (size_t i = 0; i < xt.size(); ++i) xt[i] += lambda * delta[i];
      EvalOutcome trial = engine.eval(xt, true);
      if (!trial.ok) {
        if (newton.trace)
          std::fprintf(stderr, "[shoot] it %d lambda %.4f: shot failed at y=%.3f\n", iter,
                       lambda, trial.overflow_y);
        continue;
      }
      const double trial_norm = inf_norm(trial.residual);
      if (newton.trace)
        std::fprintf(stderr, "[shoot] it %d lambda %.4f: |R| %.6e (base %.6e)\n", iter, lambda,
                     trial_norm, base_norm);
      if (trial_norm < base_norm) {
        x.swap(xt);
        base = std::move(trial);
        base_norm = trial_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      result.status = SolveStatus::NewtonDiverged;
      result.message = "no damped step reduced the residual (norm " +
                       std::to_string(base_norm) + ")";
      result.iterations = iter;
      return result;
    }
  }
  result.iterations = iter;
  if (base_norm > newton.residual_tol) {
    result.status = SolveStatus::NewtonDiverged;
    result.message = "iteration cap reached at residual " + std::to_string(base_norm);
    return result;
  }

  // converged: collect and vet the profile
  std::vector<double> c(static_cast<size_t>(params.m));
  const int extra = coupling ? 1 : 0;
  for (int i = 0; i < params.m; ++i) c[static_cast<size_t>(i)] = x[static_cast<size_t>(extra + i)];
  ProblemParams final_params = engine.params_for(x);
  if (coupling) coupling->param_out = x[0];

  ProfileSolution sol = assemble_profile(final_params, spec, c, base, base_norm);

  double floor = spec.amplitude_floor;
  if (floor <= 0.0) floor = 1e-4 * engine.amplitude_scale();
  if (sol.amplitude < floor) {
    result.status = SolveStatus::TrivialSolution;
    result.profile = std::move(sol);
    result.message = "amplitude below floor";
    return result;
  }
  if (sol.tail.kind == TailKind::Algebraic) {
    result.status = SolveStatus::AlgebraicTail;
    result.profile = std::move(sol);
    result.message = "algebraic tail: not an admissible profile";
    return result;
  }
  result.status = SolveStatus::Converged;
  result.profile = std::move(sol);
  return result;
}

}  // namespace vss
