#include "vss/odesys.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vss {

StateVector::StateVector(std::initializer_list<double> init) {
  if (init.size() > kMaxOdeDim) throw std::invalid_argument("StateVector: too many components");
  dim = static_cast<int>(init.size());
  std::copy(init.begin(), init.end(), v.begin());
}

double StateVector::max_abs() const {
  double m = 0.0;
  for (int i = 0; i < dim; ++i) m = std::max(m, std::abs(v[static_cast<size_t>(i)]));
  return m;
}

bool StateVector::finite() const {
  for (int i = 0; i < dim; ++i)
    if (!std::isfinite(v[static_cast<size_t>(i)])) return false;
  return true;
}

int ode_dimension(OdeForm form, int m) {
  switch (form) {
    case OdeForm::ProfileOriginal:
    case OdeForm::ProfileRescaled:
      if (2 * m > kMaxOdeDim) throw std::invalid_argument("ode_dimension: m too large");
      return 2 * m;
    case OdeForm::BlowupCore:
    case OdeForm::OscillatoryComponent:
      return 4;
  }
  return 0;
}

StateVector profile_rhs(double y, const StateVector& state, const ProblemParams& params,
                        OdeForm form) {
  const int dim = 2 * params.m;
  if (state.dim != dim) throw std::invalid_argument("profile_rhs: state dimension mismatch");
  StateVector d(dim);
  for (int i = 0; i + 1 < dim; ++i) d[i] = state[i + 1];
  const double sign = (params.m % 2 == 0) ? 1.0 : -1.0;
  const double b = beta(params);
  const double f = nonlinearity(state[0], params.p, params.variant);
  double top;
  if (form == OdeForm::ProfileOriginal) {
    top = y * state[1] / (2.0 * params.m) + b * state[0] - f;
  } else if (form == OdeForm::ProfileRescaled) {
    top = y * state[1] / (2.0 * params.m * b) + state[0] - f;
  } else {
    throw std::invalid_argument("profile_rhs: not a profile form");
  }
  d[dim - 1] = sign * top;
  return d;
}

StateVector blowup_rhs(double /*y*/, const StateVector& state, double p) {
  if (state.dim != 4) throw std::invalid_argument("blowup_rhs: dimension must be 4");
  StateVector d(4);
  d[0] = state[1];
  d[1] = state[2];
  d[2] = state[3];
  d[3] = -nonlinearity(state[0], p, Variant::Monotone);
  return d;
}

StateVector oscillatory_rhs(double /*s*/, const StateVector& state, double p) {
  if (state.dim != 4) throw std::invalid_argument("oscillatory_rhs: dimension must be 4");
  const double mu = -4.0 / (p - 1.0);
  StateVector d(4);
  d[0] = state[1];
  d[1] = state[2];
  d[2] = state[3];
  d[3] = -2.0 * (2.0 * mu - 3.0) * state[3] -
         (6.0 * mu * mu - 18.0 * mu + 11.0) * state[2] -
         2.0 * (2.0 * mu * mu * mu - 9.0 * mu * mu + 11.0 * mu - 3.0) * state[1] -
         mu * (mu - 1.0) * (mu - 2.0) * (mu - 3.0) * state[0] -
         nonlinearity(state[0], p, Variant::Monotone);
  return d;
}

RhsFn make_rhs(OdeForm form, const ProblemParams& params) {
  switch (form) {
    case OdeForm::ProfileOriginal:
    case OdeForm::ProfileRescaled: {
      const int m = params.m;
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      const double b = beta(params);
      const double p = params.p;
      const Variant variant = params.variant;
      const int dim = 2 * m;
      const double drift = (form == OdeForm::ProfileOriginal) ? 1.0 / (2.0 * m) : 1.0 / (2.0 * m * b);
      const double linear = (form == OdeForm::ProfileOriginal) ? b : 1.0;
      return [=](double y, const double* v, double* dv) {
        for (int i = 0; i + 1 < dim; ++i) dv[i] = v[i + 1];
        dv[dim - 1] = sign * (drift * y * v[1] + linear * v[0] - nonlinearity(v[0], p, variant));
      };
    }
    case OdeForm::BlowupCore: {
      const double p = params.p;
      return [=](double, const double* v, double* dv) {
        dv[0] = v[1];
        dv[1] = v[2];
        dv[2] = v[3];
        dv[3] = -nonlinearity(v[0], p, Variant::Monotone);
      };
    }
    case OdeForm::OscillatoryComponent: {
      const double p = params.p;
      const double mu = -4.0 / (p - 1.0);
      const double c3 = 2.0 * (2.0 * mu - 3.0);
      const double c2 = 6.0 * mu * mu - 18.0 * mu + 11.0;
      const double c1 = 2.0 * (2.0 * mu * mu * mu - 9.0 * mu * mu + 11.0 * mu - 3.0);
      const double c0 = mu * (mu - 1.0) * (mu - 2.0) * (mu - 3.0);
      return [=](double, const double* v, double* dv) {
        dv[0] = v[1];
        dv[1] = v[2];
        dv[2] = v[3];
        dv[3] = -c3 * v[3] - c2 * v[2] - c1 * v[1] - c0 * v[0] -
                nonlinearity(v[0], p, Variant::Monotone);
      };
    }
  }
  throw std::invalid_argument("make_rhs: unknown form");
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0, kA53 = 64448.0 / 6561.0,
                 kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0, kA63 = 46732.0 / 5247.0,
                 kA64 = 49.0 / 176.0, kA65 = -5103.0 / 18656.0;
constexpr double kA71 = 35.0 / 384.0, kA73 = 500.0 / 1113.0, kA74 = 125.0 / 192.0,
                 kA75 = -2187.0 / 6784.0, kA76 = 11.0 / 84.0;
constexpr double kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0, kE4 = 71.0 / 1920.0,
                 kE5 = -17253.0 / 339200.0, kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;
constexpr double kD1 = -12715105075.0 / 11282082432.0, kD3 = 87487479700.0 / 32700410799.0,
                 kD4 = -10690763975.0 / 1880347072.0, kD5 = 701980252875.0 / 199316789632.0,
                 kD6 = -1453857185.0 / 822651844.0, kD7 = 69997945.0 / 29380423.0;
constexpr double kC2 = 1.0 / 5.0, kC3 = 3.0 / 10.0, kC4 = 4.0 / 5.0, kC5 = 8.0 / 9.0;

// Quartic dense-output coefficients for one step.
struct DenseStep {
  double y0 = 0.0, h = 0.0;
  std::array<double, kMaxOdeDim> r1{}, r2{}, r3{}, r4{}, r5{};
  int dim = 0;

  double eval(int i, double theta) const {
    const double th1 = 1.0 - theta;
    const size_t k = static_cast<size_t>(i);
    return r1[k] + theta * (r2[k] + th1 * (r3[k] + theta * (r4[k] + th1 * r5[k])));
  }
};

}  // namespace

StateVector Trajectory::state_at(double y) const {
  if (ys.empty()) return final_state;
  const double lo = ys.front(), hi = ys.back();
  const bool forward = hi >= lo;
  const double yq = forward ? std::clamp(y, lo, hi) : std::clamp(y, hi, lo);
  size_t idx = 0;
  if (forward) {
    idx = static_cast<size_t>(std::lower_bound(ys.begin(), ys.end(), yq) - ys.begin());
  } else {
    idx = static_cast<size_t>(std::lower_bound(ys.begin(), ys.end(), yq, std::greater<double>()) -
                              ys.begin());
  }
  if (idx == 0) idx = 1;
  if (idx >= ys.size()) idx = ys.size() - 1;
  const size_t a = idx - 1, b = idx;
  const double ya = ys[a], yb = ys[b];
  const double h = yb - ya;
  StateVector out(dim);
  if (h == 0.0) {
    for (int c = 0; c < dim; ++c) out[c] = value(a, c);
    return out;
  }
  const double t = (yq - ya) / h;
  for (int c = 0; c < dim; ++c) {
    const double va = value(a, c), vb = value(b, c);
    if (c + 1 < dim) {
      // cubic Hermite: the next component is the exact derivative
      const double da = value(a, c + 1) * h, db = value(b, c + 1) * h;
      const double t2 = t * t, t3 = t2 * t;
      out[c] = (2 * t3 - 3 * t2 + 1) * va + (t3 - 2 * t2 + t) * da +
               (-2 * t3 + 3 * t2) * vb + (t3 - t2) * db;
    } else {
      out[c] = va + t * (vb - va);
    }
  }
  return out;
}

Trajectory integrate(const RhsFn& rhs, int dim, double y_start, double y_end,
                     const StateVector& init, const IntegratorConfig& config) {
  if (dim <= 0 || dim > kMaxOdeDim) throw std::invalid_argument("integrate: bad dimension");
  if (init.dim != dim) throw std::invalid_argument("integrate: state dimension mismatch");
  if (!(config.rtol > 0.0) || !(config.atol > 0.0))
    throw std::invalid_argument("integrate: tolerances must be positive");
  if (!init.finite()) throw std::invalid_argument("integrate: initial state not finite");

  Trajectory traj;
  traj.dim = dim;
  traj.y_start = y_start;
  traj.y_end = y_end;

  const double span = y_end - y_start;
  const double dir = (span >= 0.0) ? 1.0 : -1.0;
  const double hmax = (config.max_step > 0.0) ? config.max_step : std::abs(span);

  std::array<double, kMaxOdeDim> y = init.v;
  std::array<double, kMaxOdeDim> k1{}, k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, ytmp{}, ynew{};
  double x = y_start;

  auto push_sample = [&](double at, const double* state) {
    traj.ys.push_back(at);
    for (int i = 0; i < dim; ++i) traj.states.push_back(state[i]);
  };
  push_sample(x, y.data());

  rhs(x, y.data(), k1.data());

  // initial step from the scale of the data
  double h = std::min(hmax, std::abs(span) / 100.0 + 1e-12);
  {
    double dnorm = 0.0, ynorm = 0.0;
    for (int i = 0; i < dim; ++i) {
      dnorm = std::max(dnorm, std::abs(k1[static_cast<size_t>(i)]));
      ynorm = std::max(ynorm, std::abs(y[static_cast<size_t>(i)]));
    }
    if (dnorm > 0.0) h = std::min(h, 0.01 * (ynorm + 1.0) / dnorm);
    h = std::max(h, 1e-10);
  }
  h *= dir;

  double next_dense = x + dir * config.dense_step;
  const double hmin_floor = 1e-14;
  bool last_rejected = false;
  const int max_steps = 50'000'000;

  for (int step = 0; step < max_steps; ++step) {
    if (dir * (x - y_end) >= 0.0) break;
    if (dir * (x + h - y_end) > 0.0) h = y_end - x;
    const double habs = std::abs(h);
    if (habs < hmin_floor * std::max(1.0, std::abs(x))) {
      traj.status = IntegrateStatus::StepUnderflow;
      break;
    }

    auto stage = [&](double c, std::array<double, kMaxOdeDim>& k,
                     std::initializer_list<std::pair<const std::array<double, kMaxOdeDim>*, double>>
                         terms) {
      for (int i = 0; i < dim; ++i) {
        double acc = y[static_cast<size_t>(i)];
        for (const auto& [kv, w] : terms) acc += h * w * (*kv)[static_cast<size_t>(i)];
        ytmp[static_cast<size_t>(i)] = acc;
      }
      rhs(x + c * h, ytmp.data(), k.data());
    };

    stage(kC2, k2, {{&k1, kA21}});
    stage(kC3, k3, {{&k1, kA31}, {&k2, kA32}});
    stage(kC4, k4, {{&k1, kA41}, {&k2, kA42}, {&k3, kA43}});
    stage(kC5, k5, {{&k1, kA51}, {&k2, kA52}, {&k3, kA53}, {&k4, kA54}});
    stage(1.0, k6, {{&k1, kA61}, {&k2, kA62}, {&k3, kA63}, {&k4, kA64}, {&k5, kA65}});
    for (int i = 0; i < dim; ++i) {
      const size_t s = static_cast<size_t>(i);
      ynew[s] = y[s] + h * (kA71 * k1[s] + kA73 * k3[s] + kA74 * k4[s] + kA75 * k5[s] +
                            kA76 * k6[s]);
    }
    rhs(x + h, ynew.data(), k7.data());

    double err = 0.0;
    bool finite = true;
    for (int i = 0; i < dim; ++i) {
      const size_t s = static_cast<size_t>(i);
      const double e = h * (kE1 * k1[s] + kE3 * k3[s] + kE4 * k4[s] + kE5 * k5[s] + kE6 * k6[s] +
                            kE7 * k7[s]);
      const double sc =
          config.atol + config.rtol * std::max(std::abs(y[s]), std::abs(ynew[s]));
      err += (e / sc) * (e / sc);
      if (!std::isfinite(ynew[s])) finite = false;
    }
    err = std::sqrt(err / dim);

    if (!finite) {
      // retry with a smaller step; give up when the step floor is hit
      h *= 0.25;
      if (std::abs(h) < hmin_floor * std::max(1.0, std::abs(x))) {
        traj.status = IntegrateStatus::NonFinite;
        break;
      }
      last_rejected = true;
      continue;
    }

    if (err > 1.0) {
      const double fac = std::max(0.2, 0.9 * std::pow(err, -0.2));
      h *= fac;
      last_rejected = true;
      continue;
    }

    // accepted
    DenseStep dense;
    dense.y0 = x;
    dense.h = h;
    dense.dim = dim;
    for (int i = 0; i < dim; ++i) {
      const size_t s = static_cast<size_t>(i);
      const double ydiff = ynew[s] - y[s];
      const double bspl = h * k1[s] - ydiff;
      dense.r1[s] = y[s];
      dense.r2[s] = ydiff;
      dense.r3[s] = bspl;
      dense.r4[s] = ydiff - h * k7[s] - bspl;
      dense.r5[s] = h * (kD1 * k1[s] + kD3 * k3[s] + kD4 * k4[s] + kD5 * k5[s] + kD6 * k6[s] +
                         kD7 * k7[s]);
    }

    auto refine_root = [&](int comp) {
      double lo = 0.0, hi = 1.0;
      double flo = dense.eval(comp, lo);
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = dense.eval(comp, mid);
        if ((flo <= 0.0) == (fm <= 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    };

    const double v0_old = y[0], v0_new = ynew[0];
    if (v0_old != 0.0 && v0_new != 0.0 && (v0_old < 0.0) != (v0_new < 0.0)) {
      traj.zeros.push_back(x + refine_root(0) * h);
    }
    if (dim >= 2) {
      const double d_old = y[1], d_new = ynew[1];
      if (d_old != 0.0 && d_new != 0.0 && (d_old < 0.0) != (d_new < 0.0)) {
        const double theta = refine_root(1);
        traj.extrema_y.push_back(x + theta * h);
        traj.extrema_v.push_back(dense.eval(0, theta));
      }
    }

    while (dir * (next_dense - (x + h)) <= 0.0 && dir * (next_dense - y_end) < 0.0) {
      const double theta = (next_dense - x) / h;
      if (theta > 0.0 && theta < 1.0) {
        std::array<double, kMaxOdeDim> samp{};
        for (int i = 0; i < dim; ++i) samp[static_cast<size_t>(i)] = dense.eval(i, theta);
        push_sample(next_dense, samp.data());
      }
      next_dense += dir * config.dense_step;
    }

    x += h;
    y = ynew;
    k1 = k7;  // FSAL
    push_sample(x, y.data());

    double norm = 0.0;
    for (int i = 0; i < dim; ++i) norm = std::max(norm, std::abs(y[static_cast<size_t>(i)]));
    if (norm > config.overflow_guard) {
      traj.status = IntegrateStatus::Overflow;
      break;
    }

    const double facmax = last_rejected ? 1.0 : 10.0;
    last_rejected = false;
    double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    fac = std::min(facmax, std::max(0.2, fac));
    h *= fac;
    if (std::abs(h) > hmax) h = dir * hmax;
  }

  traj.y_stop = x;
  traj.final_state = StateVector(dim);
  for (int i = 0; i < dim; ++i) traj.final_state[i] = y[static_cast<size_t>(i)];
  return traj;
}

Trajectory integrate(OdeForm form, const ProblemParams& params, double y_start, double y_end,
                     const StateVector& init, const IntegratorConfig& config) {
  return integrate(make_rhs(form, params), ode_dimension(form, params.m), y_start, y_end, init,
                   config);
}

}  // namespace vss
