#include "sflock/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sflock {

namespace {

// Dormand-Prince 5(4) tableau (autonomous system, nodes not needed).
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// PI controller constants.
constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 10.0;
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - 0.75 * kBeta;

using Vec = std::vector<double>;

// State packed as [x_0..x_{N-1}, v_0..v_{N-1}].
class Packed {
 public:
  explicit Packed(const ModelParams& params) : params_(params), n_(params.n_agents()) {}

  std::size_t agents() const { return n_; }

  bool eval(const Vec& y, Vec& dy, std::size_t* bad, StepStats& stats) const {
    ++stats.rhs_evals;
    std::copy(y.begin() + static_cast<std::ptrdiff_t>(n_), y.end(), dy.begin());
    return rhs_into(y.data(), y.data() + n_, params_, dy.data() + n_, bad);
  }

  Vec pack(const State& s) const {
    Vec y(2 * n_);
    std::copy(s.x.begin(), s.x.end(), y.begin());
    std::copy(s.v.begin(), s.v.end(), y.begin() + static_cast<std::ptrdiff_t>(n_));
    return y;
  }

  State unpack(const Vec& y, double t) const {
    State s;
    s.t = t;
    s.x.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n_));
    s.v.assign(y.begin() + static_cast<std::ptrdiff_t>(n_), y.end());
    return s;
  }

  double min_slack(const Vec& y, std::size_t* link = nullptr) const {
    double best = std::abs(y[1] - y[0]) - params_.delta[0];
    std::size_t at = 0;
    for (std::size_t i = 1; i + 1 < n_; ++i) {
      const double s = std::abs(y[i + 1] - y[i]) - params_.delta[i];
      if (s < best) {
        best = s;
        at = i;
      }
    }
    if (link) *link = at;
    return best;
  }

  Sample sample(const Vec& y, double t) const {
    Sample s{unpack(y, t), {}, {}};
    s.energy = energy(s.state, params_);
    s.diag = diagnostics(s.state, params_);
    return s;
  }

 private:
  const ModelParams& params_;
  std::size_t n_;
};

void hermite(const Vec& y0, const Vec& f0, const Vec& y1, const Vec& f1, double h, double theta, Vec& out) {
  const double t2 = theta * theta;
  const double t3 = t2 * theta;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + theta;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  for (std::size_t i = 0; i < y0.size(); ++i) {
    out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
  }
}

void check_initial_gaps(const State& initial, const ModelParams& params, double margin) {
  const auto slacks = gap_slacks(initial, params);
  for (std::size_t i = 0; i < slacks.size(); ++i) {
    if (!(slacks[i] > margin)) {
      throw std::invalid_argument("initial gap between agents " + std::to_string(i) + " and " +
                                  std::to_string(i + 1) + " does not exceed delta plus the collision slack");
    }
  }
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw std::invalid_argument("tolerances must be positive");
  if (!(h_min > 0.0) || !(h_min <= h_init) || !(h_init <= h_max)) {
    throw std::invalid_argument("step sizes must satisfy 0 < h_min <= h_init <= h_max");
  }
  if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  if (!(collision_slack > 0.0)) throw std::invalid_argument("collision_slack must be positive");
  if (!(sample_dt > 0.0)) throw std::invalid_argument("sample_dt must be positive");
}

double default_collision_slack(const ModelParams& params) {
  const double dmax = *std::max_element(params.delta.begin(), params.delta.end());
  return 1e-9 * (1.0 + dmax);
}

std::string to_string(TerminationKind kind) {
  switch (kind) {
    case TerminationKind::reached_t_end:
      return "reached_t_end";
    case TerminationKind::collision:
      return "collision";
    case TerminationKind::step_underflow:
      return "step_underflow";
  }
  return "unknown";
}

Trace integrate(const State& initial, const ModelParams& params, const IntegratorConfig& cfg) {
  params.validate();
  initial.validate(params);
  cfg.validate();
  check_initial_gaps(initial, params, cfg.collision_slack);

  const Packed sys(params);
  const std::size_t dim = 2 * sys.agents();
  Trace trace;
  StepStats& stats = trace.stats;

  double t = initial.t;
  const double t_stop = initial.t + cfg.t_end;
  Vec y = sys.pack(initial);
  Vec k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), ynew(dim), tmp(dim), interp(dim);
  std::size_t bad = 0;
  sys.eval(y, k1, &bad, stats);

  trace.samples.push_back(sys.sample(y, t));
  std::size_t next_grid = 1;
  auto grid_time = [&](std::size_t k) { return initial.t + static_cast<double>(k) * cfg.sample_dt; };

  double h = std::clamp(cfg.h_init, cfg.h_min, cfg.h_max);
  double err_old = 1e-4;
  bool last_rejected = false;

  // Emits grid samples in (t, t_upto] from the current step's interpolant.
  auto emit_grid = [&](double h_step, double t_upto) {
    while (next_grid * cfg.sample_dt <= cfg.t_end * (1.0 + 1e-14) && grid_time(next_grid) <= t_upto) {
      const double tg = grid_time(next_grid);
      ++next_grid;
      if (tg <= trace.samples.back().state.t) continue;
      if (tg == t + h_step) {
        trace.samples.push_back(sys.sample(ynew, tg));
      } else {
        hermite(y, k1, ynew, k7, h_step, (tg - t) / h_step, interp);
        trace.samples.push_back(sys.sample(interp, tg));
      }
    }
  };

  while (t < t_stop) {
    const double remaining = t_stop - t;
    const bool final_step = h >= remaining;
    if (final_step) h = remaining;

    bool ok = true;
    auto stage = [&](Vec& k, const auto& combine) {
      if (!ok) return;
      for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + h * combine(i);
      ok = sys.eval(tmp, k, &bad, stats);
    };
    stage(k2, [&](std::size_t i) { return a21 * k1[i]; });
    stage(k3, [&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; });
    stage(k4, [&](std::size_t i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; });
    stage(k5, [&](std::size_t i) { return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]; });
    stage(k6, [&](std::size_t i) {
      return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i];
    });
    if (ok) {
      for (std::size_t i = 0; i < dim; ++i) {
        ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
      }
      ok = sys.eval(ynew, k7, &bad, stats);
    }

    if (!ok) {
      // A stage reached the singular set: shrink without consulting the error estimate.
      ++stats.rejected;
      last_rejected = true;
      if (h * 0.5 < cfg.h_min) {
        trace.termination.kind = TerminationKind::collision;
        trace.termination.agents = {bad, bad + 1};
        trace.termination.t_lo = t;
        trace.termination.t_hi = t + h;
        break;
      }
      h *= 0.5;
      continue;
    }

    double err = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]) / sc;
      err += ei * ei;
    }
    err = std::sqrt(err / static_cast<double>(dim));

    if (!(err <= 1.0)) {
      ++stats.rejected;
      last_rejected = true;
      const double fac = std::isfinite(err) ? std::max(kFacMin, kSafety * std::pow(err, -0.2)) : kFacMin;
      h *= fac;
      if (h < cfg.h_min) {
        trace.termination.kind = TerminationKind::step_underflow;
        trace.termination.t_lo = t;
        trace.termination.t_hi = t;
        break;
      }
      continue;
    }

    ++stats.accepted;
    const double t_new = final_step ? t_stop : t + h;

    std::size_t link = 0;
    if (sys.min_slack(ynew, &link) <= cfg.collision_slack) {
      // Bisect the interpolant for the crossing of the collision threshold.
      double lo = t;
      double hi = t_new;
      const double width = 1e-10 * cfg.t_end;
      for (int it = 0; it < 200 && hi - lo > width; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        hermite(y, k1, ynew, k7, h, (mid - t) / h, interp);
        if (sys.min_slack(interp) > cfg.collision_slack) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      emit_grid(h, lo);
      Vec event_state(dim);
      if (hi == t_new) {
        event_state = ynew;
      } else {
        hermite(y, k1, ynew, k7, h, (hi - t) / h, event_state);
      }
      sys.min_slack(event_state, &link);
      if (hi > trace.samples.back().state.t) trace.samples.push_back(sys.sample(event_state, hi));
      trace.termination.kind = TerminationKind::collision;
      trace.termination.agents = {link, link + 1};
      trace.termination.t_lo = lo;
      trace.termination.t_hi = hi;
      return trace;
    }

    emit_grid(h, t_new);
    t = t_new;
    y.swap(ynew);
    k1.swap(k7);

    double fac = kSafety * std::pow(std::max(err, 1e-10), -kExpo) * std::pow(err_old, kBeta);
    fac = std::clamp(fac, kFacMin, kFacMax);
    if (last_rejected) fac = std::min(fac, 1.0);
    err_old = std::max(err, 1e-4);
    last_rejected = false;
    h = std::min(h * fac, cfg.h_max);
    h = std::max(h, cfg.h_min);
  }

  if (trace.termination.kind == TerminationKind::reached_t_end) {
    trace.termination.t_lo = trace.termination.t_hi = t;
  }
  if (trace.samples.back().state.t < t) trace.samples.push_back(sys.sample(y, t));
  return trace;
}

Trace integrate_oracle(const State& initial, const ModelParams& params, double h, double t_end, double sample_dt) {
  params.validate();
  initial.validate(params);
  if (!(h > 0.0) || !(t_end > 0.0)) throw std::invalid_argument("oracle step and horizon must be positive");
  check_initial_gaps(initial, params, 0.0);

  const Packed sys(params);
  const std::size_t dim = 2 * sys.agents();
  Trace trace;
  StepStats& stats = trace.stats;

  Vec y = sys.pack(initial);
  Vec k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));
  const std::size_t stride =
      sample_dt > 0.0 ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(sample_dt / h))) : 1;

  trace.samples.push_back(sys.sample(y, initial.t));
  std::size_t bad = 0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = initial.t + static_cast<double>(k) * h;
    const double t_next = k + 1 == steps ? initial.t + t_end : initial.t + static_cast<double>(k + 1) * h;
    const double hk = t_next - t;

    bool ok = sys.eval(y, k1, &bad, stats);
    if (ok) {
      for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * hk * k1[i];
      ok = sys.eval(tmp, k2, &bad, stats);
    }
    if (ok) {
      for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * hk * k2[i];
      ok = sys.eval(tmp, k3, &bad, stats);
    }
    if (ok) {
      for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + hk * k3[i];
      ok = sys.eval(tmp, k4, &bad, stats);
    }
    if (ok) {
      for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + hk / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      std::size_t link = 0;
      if (!(sys.min_slack(tmp, &link) > 0.0)) {
        ok = false;
        bad = link;
      }
    }
    if (!ok) {
      ++stats.rejected;
      trace.termination.kind = TerminationKind::collision;
      trace.termination.agents = {bad, bad + 1};
      trace.termination.t_lo = t;
      trace.termination.t_hi = t_next;
      if (trace.samples.back().state.t < t) trace.samples.push_back(sys.sample(y, t));
      return trace;
    }
    ++stats.accepted;
    y.swap(tmp);
    if ((k + 1) % stride == 0 || k + 1 == steps) trace.samples.push_back(sys.sample(y, t_next));
  }
  trace.termination.t_lo = trace.termination.t_hi = initial.t + t_end;
  return trace;
}

}  // namespace sflock
