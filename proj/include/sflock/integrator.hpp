#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sflock/model.hpp"

namespace sflock {

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double h_init = 1e-3;
  double h_min = 1e-14;
  double h_max = 0.5;
  double t_end = 1.0;
  double collision_slack = 2e-9;  // stop once the smallest gap slack reaches this
  double sample_dt = 0.01;

  void validate() const;
};

/// 1e-9 * (1 + max delta).
double default_collision_slack(const ModelParams& params);

struct Sample {
  State state;
  EnergyReport energy;
  Diagnostics diag;
};

enum class TerminationKind { reached_t_end, collision, step_underflow };

struct Termination {
  TerminationKind kind = TerminationKind::reached_t_end;
  std::pair<std::size_t, std::size_t> agents{0, 0};  // collision only
  double t_lo = 0.0;  // collision bracket, or failure time
  double t_hi = 0.0;
};

std::string to_string(TerminationKind kind);

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
};

struct Trace {
  std::vector<Sample> samples;
  Termination termination;
  StepStats stats;

  const Sample& front() const { return samples.front(); }
  const Sample& back() const { return samples.back(); }
};

/// Adaptive Dormand-Prince 5(4) integration with PI step control.
///
/// Steps whose stages touch the singular set are rejected and halved; a
/// collision is declared when the gap slack reaches `cfg.collision_slack`
/// (event time refined by bisection on the step interpolant) or when a step
/// can no longer be halved above `cfg.h_min`. Samples are taken every
/// `cfg.sample_dt` by cubic Hermite interpolation, plus one at the final time.
///
/// Throws std::invalid_argument if the initial state violates the gap
/// precondition or the configuration is inconsistent.
Trace integrate(const State& initial, const ModelParams& params, const IntegratorConfig& cfg);

/// Classical fixed-step RK4, used only to cross-check `integrate`.
/// Stops at the first step whose stages see a non-positive gap slack.
/// `sample_dt <= 0` records every step.
Trace integrate_oracle(const State& initial, const ModelParams& params, double h, double t_end,
                       double sample_dt = 0.0);

}  // namespace sflock
