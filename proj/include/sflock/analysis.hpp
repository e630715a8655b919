#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sflock/integrator.hpp"
#include "sflock/model.hpp"

namespace sflock {

enum class TheoremId { existence_ordered, existence_unordered, blow_up, flocking, exponential_formation };

std::string to_string(TheoremId id);

struct Hypothesis {
  std::string name;
  bool holds = false;
  double witness = 0.0;
};

struct ConclusionCheck {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
};

struct ConditionReport {
  TheoremId theorem_id = TheoremId::flocking;
  std::vector<Hypothesis> hypotheses;
  std::vector<ConclusionCheck> conclusion_checks;
  std::map<std::string, double> derived_constants;
  std::vector<std::string> notes;

  bool hypotheses_hold() const;
  bool conclusions_pass() const;
  const Hypothesis* hypothesis(const std::string& name) const;
  const ConclusionCheck* conclusion(const std::string& name) const;
  std::optional<double> constant(const std::string& name) const;
};

/// Which of the two global-existence regimes covers the initial data.
/// Regime "ordered" accepts either orientation of the string (the dynamics
/// are invariant under x -> -x, v -> -v, z -> -z).
/// derived_constants: regime_ordered, regime_unordered (1 or 0), min_gap_slack.
ConditionReport check_existence_regime(const State& initial, const ModelParams& params);

/// Sum of slack^-(alpha-2) (alpha > 2) or of log(slack) (alpha == 2).
double l_functional(const State& state, const ModelParams& params);

/// Flocking hypothesis: 2E(x0, v0) below the integral of phi.
/// derived_constants: energy, threshold (on E, i.e. 1/(2(beta-1))),
/// threshold_2e, rho (when the condition holds).
ConditionReport check_flocking_condition(const State& initial, const ModelParams& params);

/// sqrt(Phi^-1(2E)); throws std::range_error when 2E is outside the range of Phi.
double formation_radius(const State& initial, const ModelParams& params);

/// Two-agent finite-time collision construction; derived t_star_bound.
ConditionReport blow_up_certificate(const State& initial, const ModelParams& params);

/// Per-link z_i > delta_i and z_i > rho + delta_i.
ConditionReport check_formation_constraint(const ModelParams& params, double rho);

struct TraceTolerances {
  double mean_velocity = 0.0;
  double energy_monotone = 0.0;
  double energy_balance = 0.0;
  std::optional<double> velocity_diameter;  // flocking threshold at the final sample
  std::optional<double> formation_error;    // formation threshold at the final sample
};

/// Tolerances derived from the integrator settings and the trace itself.
TraceTolerances default_tolerances(const Trace& trace, const IntegratorConfig& cfg, bool flocking_scenario);

/// Momentum, energy and collision certificates on a sampled trace, plus the
/// final flocking/formation thresholds when given. Failures are report entries.
ConditionReport verify_trace_certificates(const Trace& trace, const ModelParams& params, const TraceTolerances& tol);

/// Trapezoid estimate of the integral of the dissipation over the trace.
double integrated_dissipation(const Trace& trace);

struct RateFit {
  double rate = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of log E_gamma(t) over samples with t in [t_lo, t_hi].
RateFit fit_exponential_rate(const Trace& trace, const ModelParams& params, double gamma,
                             std::pair<double, double> window);
/// Window covering the last half of the trace.
std::pair<double, double> default_rate_window(const Trace& trace);

/// gamma = 2 max(sqrt(2N / phi(rho^2)), 1) with rho the largest observed formation error.
double default_gamma(const Trace& trace, const ModelParams& params);

/// Fills the e_gamma field of every sample.
void annotate_gamma(Trace& trace, const ModelParams& params, double gamma);

/// Decay of E_gamma for every gamma, plus the observed gap infimum.
ConditionReport check_exponential_formation(const Trace& trace, const ModelParams& params,
                                            const std::vector<double>& gammas, double min_r_squared = 0.95);

/// sum_{i,j} |i - j| = N (N^2 - 1) / 3.
double chain_constant(std::size_t n_agents);

}  // namespace sflock
