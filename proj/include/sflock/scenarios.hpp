#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sflock/integrator.hpp"
#include "sflock/model.hpp"

namespace sflock {

struct Expectation {
  std::string name;
  bool expected = true;
};

/// A reproducible experiment: parameters, initial data, integrator settings
/// and the certificate outcomes it is expected to produce.
struct Scenario {
  std::string name;
  std::string builder;                       // "five", "ten", "blowup" or "explicit"
  std::map<std::string, double> builder_args;  // inputs the builder was called with
  ModelParams params;
  State initial;
  IntegratorConfig integrator_cfg;
  std::vector<Expectation> expected;
  bool blow_up = false;
  bool flocking = false;  // final flocking/formation thresholds apply
};

enum class FiveAgentCase { at_rest, moving };

inline constexpr std::uint64_t kDefaultSeed = 20220611;

/// Five agents, alpha 2.1, beta 0.8, delta 2, z 4, ordered with decreasing
/// positions. `at_rest`: zero velocities and gap slacks in [1, 3].
/// `moving`: slacks in [0.2, 0.6] and velocity spread around `v_mean`.
Scenario scenario_five_agent(FiveAgentCase which, double v_mean, std::uint64_t seed = kDefaultSeed);

/// Ten agents, alpha 2.2, delta 0, z 0.5; both halves of the string start
/// moving apart. The same data serve every beta: the builder enforces
/// E < 20 at beta 1.025 and E > 0.5/3.1 at beta 4.1.
/// Throws std::domain_error for beta <= 1.
Scenario scenario_ten_agent(double beta, bool control = true, std::uint64_t seed = kDefaultSeed);

/// Two agents at x = (0, delta1 + gap0), z = -delta1, with the velocity
/// difference that makes the finite-time collision construction apply.
/// Throws std::domain_error unless alpha is in (0, 1) and gap0, delta1 > 0.
Scenario scenario_blowup(double alpha, double gap0, double delta1);

std::vector<std::string> builtin_names();
/// Throws std::invalid_argument for unknown names.
Scenario builtin_scenario(const std::string& name);
std::vector<Scenario> builtin_scenarios();

/// Re-runs the builder with one argument replaced. Returns false when the
/// scenario's builder does not take `key`.
bool rebuild_with(Scenario& scenario, const std::string& key, double value);

}  // namespace sflock
