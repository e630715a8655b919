#include "sflock/experiment.hpp"

#include <algorithm>

namespace sflock {

bool RunResult::all_met() const {
  return std::all_of(expectations.begin(), expectations.end(), [](const ExpectationOutcome& e) { return e.met(); });
}

int RunResult::exit_code() const {
  switch (trace.termination.kind) {
    case TerminationKind::reached_t_end:
      return 0;
    case TerminationKind::collision:
      return 2;
    case TerminationKind::step_underflow:
      return 1;
  }
  return 1;
}

std::vector<ConditionReport> initial_reports(const Scenario& scenario) {
  std::vector<ConditionReport> out;
  out.push_back(check_existence_regime(scenario.initial, scenario.params));
  out.push_back(check_flocking_condition(scenario.initial, scenario.params));
  if (auto rho = out.back().constant("rho")) {
    out.push_back(check_formation_constraint(scenario.params, *rho));
  }
  if (scenario.params.n_agents() == 2) out.push_back(blow_up_certificate(scenario.initial, scenario.params));
  return out;
}

RunResult run_scenario(const Scenario& scenario, const RunOptions& options) {
  RunResult r;
  r.scenario = scenario;
  r.reports = initial_reports(scenario);
  r.trace = integrate(scenario.initial, scenario.params, scenario.integrator_cfg);
  r.gamma = options.gamma ? *options.gamma : default_gamma(r.trace, scenario.params);
  annotate_gamma(r.trace, scenario.params, r.gamma);

  auto tol = default_tolerances(r.trace, scenario.integrator_cfg, false);
  tol.formation_error = options.formation_threshold;
  tol.velocity_diameter = options.flocking_threshold;
  const auto certs = verify_trace_certificates(r.trace, scenario.params, tol);
  r.reports.push_back(certs);

  auto& o = r.outcomes;
  const auto& term = r.trace.termination;
  const auto& first = r.trace.front();
  const auto& last = r.trace.back();

  for (const auto& c : certs.conclusion_checks) o[c.name] = c.passed;
  o["collision_free"] = term.kind == TerminationKind::reached_t_end && certs.conclusion("collision_free")->passed;
  o["collision"] = term.kind == TerminationKind::collision;
  o["formation_diverged"] = last.diag.formation_error > 10.0 * first.diag.formation_error;

  const auto& flock = *std::find_if(r.reports.begin(), r.reports.end(),
                                    [](const ConditionReport& c) { return c.theorem_id == TheoremId::flocking; });
  o["flocking_condition"] = flock.constant("condition_holds").value_or(0.0) > 0.0;

  if (scenario.params.n_agents() == 2) {
    const auto& blow = *std::find_if(r.reports.begin(), r.reports.end(),
                                     [](const ConditionReport& c) { return c.theorem_id == TheoremId::blow_up; });
    o["blow_up_hypotheses"] = blow.hypotheses_hold();
    if (auto bound = blow.constant("t_star_bound")) {
      o["collision_before_bound"] = o["collision"] && term.t_hi - first.state.t <= *bound * (1.0 + 1e-6);
    } else {
      o["collision_before_bound"] = false;
    }
  }

  if (term.kind == TerminationKind::reached_t_end) {
    const auto decay = check_exponential_formation(r.trace, scenario.params, options.decay_gammas);
    o["exponential_decay"] = decay.conclusions_pass();
    r.reports.push_back(decay);
  }

  for (const auto& e : scenario.expected) {
    ExpectationOutcome eo{e.name, e.expected, std::nullopt};
    if (auto it = o.find(e.name); it != o.end()) eo.observed = it->second;
    r.expectations.push_back(eo);
  }
  return r;
}

}  // namespace sflock
