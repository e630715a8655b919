#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sflock/analysis.hpp"
#include "sflock/integrator.hpp"
#include "sflock/scenarios.hpp"

namespace sflock {

struct RunOptions {
  std::optional<double> gamma;  // e_gamma column; default_gamma() when unset
  double formation_threshold = 1e-3;
  double flocking_threshold = 1e-3;
  std::vector<double> decay_gammas{5.0, 10.0, 20.0};
};

struct ExpectationOutcome {
  std::string name;
  bool expected = true;
  std::optional<bool> observed;  // empty when the run cannot decide it
  bool met() const { return observed && *observed == expected; }
};

struct RunResult {
  Scenario scenario;
  Trace trace;
  double gamma = 0.0;
  std::vector<ConditionReport> reports;
  std::map<std::string, bool> outcomes;
  std::vector<ExpectationOutcome> expectations;

  bool all_met() const;
  /// 0 on reaching t_end, 2 on collision, 1 on integrator failure.
  int exit_code() const;
};

/// Initial-data reports only: existence regime, flocking condition,
/// formation constraint (when rho is available), blow-up (two agents).
std::vector<ConditionReport> initial_reports(const Scenario& scenario);

RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

}  // namespace sflock
