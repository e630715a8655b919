#include "sflock/scenarios.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace sflock {

namespace {

// Platform-independent uniform draw in [0, 1).
class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : engine_(seed) {}
  double operator()() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double operator()(double lo, double hi) { return lo + (hi - lo) * (*this)(); }

 private:
  std::mt19937_64 engine_;
};

void center(std::vector<double>& x) {
  double m = 0.0;
  for (double a : x) m += a;
  m /= static_cast<double>(x.size());
  for (double& a : x) a -= m;
}

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

Scenario scenario_five_agent(FiveAgentCase which, double v_mean, std::uint64_t seed) {
  constexpr std::size_t n = 5;
  Scenario s;
  s.builder = "five";
  s.builder_args = {{"moving", which == FiveAgentCase::moving ? 1.0 : 0.0},
                    {"v_mean", v_mean},
                    {"seed", static_cast<double>(seed)}};
  s.params.alpha = 2.1;
  s.params.beta = 0.8;
  s.params.delta.assign(n - 1, 2.0);
  s.params.z.assign(n - 1, 4.0);

  Uniform rng(seed);
  const bool moving = which == FiveAgentCase::moving;
  s.initial.x.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double slack = moving ? rng(0.2, 0.6) : rng(1.0, 3.0);
    s.initial.x[i + 1] = s.initial.x[i] - (s.params.delta[i] + slack);
  }
  center(s.initial.x);
  s.initial.v.assign(n, 0.0);
  if (moving) {
    for (double& v : s.initial.v) v = rng(-0.5, 0.5);
    center(s.initial.v);
    for (double& v : s.initial.v) v += v_mean;
  } else {
    for (double& v : s.initial.v) v = v_mean;
  }

  s.integrator_cfg.t_end = 60.0;
  // Fine enough for the trapezoid estimate of the dissipation integral to
  // resolve the initial close-proximity transient.
  s.integrator_cfg.sample_dt = 0.0025;
  s.integrator_cfg.collision_slack = default_collision_slack(s.params);
  s.flocking = true;
  if (!moving) {
    s.name = "five-at-rest";
  } else if (v_mean == 0.0) {
    s.name = "five-moving";
  } else {
    s.name = "five-moving-vmean" + format_number(v_mean);
  }
  s.expected = {{"collision_free", true}, {"mean_velocity_conserved", true}, {"energy_non_increasing", true}};
  if (moving && v_mean != 0.0) {
    s.expected.push_back({"exponential_decay", true});
  } else {
    s.expected.push_back({"flocking_condition", true});
    s.expected.push_back({"formation_acquired", true});
    s.expected.push_back({"energy_balance", true});
  }
  return s;
}

Scenario scenario_ten_agent(double beta, bool control, std::uint64_t seed) {
  if (!(beta > 1.0)) throw std::domain_error("the ten-agent experiment needs beta > 1");
  constexpr std::size_t n = 10;
  constexpr double kSpacing = 0.5;
  constexpr double kSplitSpeed = 0.8;

  Scenario s;
  s.builder = "ten";
  s.builder_args = {{"beta", beta}, {"control", control ? 1.0 : 0.0}, {"seed", static_cast<double>(seed)}};
  s.params.alpha = 2.2;
  s.params.beta = beta;
  s.params.delta.assign(n - 1, 0.0);
  s.params.z.assign(n - 1, kSpacing);
  s.params.control = control;

  Uniform rng(seed);
  s.initial.x.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    s.initial.x[i + 1] = s.initial.x[i] - kSpacing * (1.0 + rng(-0.05, 0.05));
  }
  center(s.initial.x);
  s.initial.v.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    s.initial.v[i] = (i < n / 2 ? kSplitSpeed : -kSplitSpeed) + rng(-0.1, 0.1);
  }
  center(s.initial.v);

  // Same data for every beta: keep the mild-control case inside its flocking
  // region and the stiff-control case outside of it.
  ModelParams mild = s.params;
  mild.beta = 1.025;
  mild.control = true;
  ModelParams stiff = mild;
  stiff.beta = 4.1;
  for (int k = 0; k < 100 && !(energy(s.initial, mild).e_total < 0.5 / (mild.beta - 1.0)); ++k) {
    for (double& v : s.initial.v) v *= 0.9;
  }
  if (!(energy(s.initial, mild).e_total < 0.5 / (mild.beta - 1.0)) ||
      !(energy(s.initial, stiff).e_total > 0.5 / (stiff.beta - 1.0))) {
    throw std::logic_error("ten-agent initial data violate the energy side conditions");
  }

  s.integrator_cfg.t_end = 100.0;
  s.integrator_cfg.sample_dt = 0.05;
  s.integrator_cfg.collision_slack = default_collision_slack(s.params);
  s.name = "ten-beta" + format_number(beta) + (control ? "" : "-uncontrolled");

  const bool flocks = beta < 2.0;  // data sit inside the region only for the mild kernel
  s.flocking = control && flocks;
  if (control) {
    s.expected = {{"collision_free", true}, {"flocking_condition", flocks}, {"formation_acquired", flocks}};
    if (flocks) {
      s.expected.push_back({"flocking_achieved", true});
    } else {
      s.expected.push_back({"formation_diverged", true});
    }
  } else {
    s.expected = {{"collision_free", true}, {"formation_acquired", false}};
  }
  s.expected.push_back({"mean_velocity_conserved", true});
  s.expected.push_back({"energy_non_increasing", true});
  return s;
}

Scenario scenario_blowup(double alpha, double gap0, double delta1) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("blow-up needs alpha in (0, 1)");
  if (!(gap0 > 0.0)) throw std::domain_error("blow-up needs a positive initial gap slack");
  if (!(delta1 > 0.0)) throw std::domain_error("blow-up needs a positive exclusion radius");

  Scenario s;
  s.builder = "blowup";
  s.builder_args = {{"alpha", alpha}, {"gap0", gap0}, {"delta1", delta1}};
  s.params.alpha = alpha;
  s.params.beta = 1.0;
  s.params.delta = {delta1};
  s.params.z = {-delta1};
  s.initial.x = {0.0, delta1 + gap0};
  const double dv = 2.0 / (1.0 - alpha) * std::pow(gap0, 1.0 - alpha);
  s.initial.v = {0.5 * dv, -0.5 * dv};

  const double bound = std::pow(gap0, alpha) * (1.0 - alpha) / (2.0 * alpha);
  s.integrator_cfg.t_end = 2.0 * bound;
  s.integrator_cfg.sample_dt = bound / 100.0;
  s.integrator_cfg.h_init = bound * 1e-4;
  s.integrator_cfg.h_max = bound / 10.0;
  s.integrator_cfg.collision_slack = default_collision_slack(s.params);
  s.blow_up = true;
  s.name = "blowup-a" + format_number(alpha) + (gap0 == 1.0 ? "" : "-g" + format_number(gap0));
  s.expected = {{"blow_up_hypotheses", true}, {"collision", true}, {"collision_before_bound", true}};
  return s;
}

std::vector<std::string> builtin_names() {
  return {"five-at-rest",
          "five-moving",
          "five-moving-vmean-0.2",
          "ten-beta4.1",
          "ten-beta1.025",
          "ten-beta4.1-uncontrolled",
          "ten-beta1.025-uncontrolled",
          "blowup-a0.5",
          "blowup-a0.9",
          "blowup-a0.5-g4"};
}

Scenario builtin_scenario(const std::string& name) {
  if (name == "five-at-rest" || name == "five") return scenario_five_agent(FiveAgentCase::at_rest, 0.0);
  if (name == "five-moving") return scenario_five_agent(FiveAgentCase::moving, 0.0);
  if (name == "five-moving-vmean-0.2") return scenario_five_agent(FiveAgentCase::moving, -0.2);
  if (name == "ten-beta4.1") return scenario_ten_agent(4.1);
  if (name == "ten-beta1.025" || name == "ten") return scenario_ten_agent(1.025);
  if (name == "ten-beta4.1-uncontrolled") return scenario_ten_agent(4.1, false);
  if (name == "ten-beta1.025-uncontrolled") return scenario_ten_agent(1.025, false);
  if (name == "blowup-a0.5" || name == "blowup") return scenario_blowup(0.5, 1.0, 1.0);
  if (name == "blowup-a0.9") return scenario_blowup(0.9, 1.0, 1.0);
  if (name == "blowup-a0.5-g4") return scenario_blowup(0.5, 4.0, 1.0);
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

std::vector<Scenario> builtin_scenarios() {
  std::vector<Scenario> out;
  for (const auto& name : builtin_names()) out.push_back(builtin_scenario(name));
  return out;
}

bool rebuild_with(Scenario& scenario, const std::string& key, double value) {
  auto args = scenario.builder_args;
  if (!args.count(key)) return false;
  args[key] = value;
  const auto seed = static_cast<std::uint64_t>(args.count("seed") ? args["seed"] : 0.0);
  if (scenario.builder == "five") {
    scenario = scenario_five_agent(args["moving"] != 0.0 ? FiveAgentCase::moving : FiveAgentCase::at_rest,
                                   args["v_mean"], seed);
  } else if (scenario.builder == "ten") {
    scenario = scenario_ten_agent(args["beta"], args["control"] != 0.0, seed);
  } else if (scenario.builder == "blowup") {
    scenario = scenario_blowup(args["alpha"], args["gap0"], args["delta1"]);
  } else {
    return false;
  }
  return true;
}

}  // namespace sflock
