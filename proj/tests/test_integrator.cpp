#include <doctest.h>

#include <cmath>
#include <future>

#include "gen.hpp"
#include "sflock/integrator.hpp"
#include "sflock/scenarios.hpp"

using namespace sflock;

namespace {

ModelParams formation_params() {
  ModelParams p;
  p.alpha = 2.1;
  p.beta = 0.8;
  p.delta = {2, 2, 2};
  p.z = {4, 4, 4};
  return p;
}

State formation_state() {
  State s;
  s.x = {12, 8, 4, 0};
  s.v = {0.3, 0.3, 0.3, 0.3};
  return s;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("equilibrium stays put") {
  IntegratorConfig cfg;
  cfg.t_end = 20;
  cfg.sample_dt = 0.5;
  const auto p = formation_params();
  const auto s0 = formation_state();
  const auto tr = integrate(s0, p, cfg);
  CHECK(tr.termination.kind == TerminationKind::reached_t_end);
  CHECK(tr.back().state.t == doctest::Approx(20.0));
  for (const auto& smp : tr.samples) {
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(std::abs(smp.state.v[i] - 0.3) <= cfg.abs_tol);
      CHECK(smp.state.x[i] - 0.3 * smp.state.t == doctest::Approx(s0.x[i]).epsilon(1e-12));
    }
  }
  const auto orc = integrate_oracle(s0, p, 0.01, 5.0, 1.0);
  CHECK(orc.termination.kind == TerminationKind::reached_t_end);
  for (const auto& smp : orc.samples) CHECK(max_diff(smp.state.v, s0.v) <= 1e-12);
}

TEST_CASE("preconditions") {
  const auto p = formation_params();
  auto s = formation_state();
  IntegratorConfig cfg;
  s.x = {12, 9.5, 7, 0};  // slacks 0.5, 0.5, 5
  CHECK_NOTHROW(integrate(s, p, cfg));
  s.x[2] = 7.5;  // slack 0
  CHECK_THROWS_AS(integrate(s, p, cfg), std::invalid_argument);
  s = formation_state();
  cfg.h_min = 1.0;  // above h_init
  CHECK_THROWS_AS(integrate(s, p, cfg), std::invalid_argument);
  cfg = IntegratorConfig{};
  cfg.rel_tol = 0.0;
  CHECK_THROWS_AS(integrate(s, p, cfg), std::invalid_argument);
  cfg = IntegratorConfig{};
  cfg.collision_slack = -1;
  CHECK_THROWS_AS(integrate(s, p, cfg), std::invalid_argument);
  CHECK_THROWS_AS(integrate_oracle(s, p, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("default collision slack") {
  auto p = formation_params();
  CHECK(default_collision_slack(p) == doctest::Approx(3e-9));
  p.delta = {0, 0, 0};
  CHECK(default_collision_slack(p) == doctest::Approx(1e-9));
}

TEST_CASE("samples are on the grid and strictly increasing") {
  const auto sc = scenario_five_agent(FiveAgentCase::moving, 0.0);
  auto cfg = sc.integrator_cfg;
  cfg.t_end = 7.0;
  cfg.sample_dt = 0.3;
  const auto tr = integrate(sc.initial, sc.params, cfg);
  REQUIRE(tr.samples.size() >= 2);
  CHECK(tr.front().state.t == 0.0);
  for (std::size_t i = 1; i < tr.samples.size(); ++i) {
    CHECK(tr.samples[i].state.t > tr.samples[i - 1].state.t);
  }
  CHECK(tr.samples[1].state.t == doctest::Approx(0.3));
  CHECK(tr.back().state.t == doctest::Approx(7.0));
  CHECK(tr.stats.accepted > 0);
  CHECK(tr.stats.rhs_evals >= 6 * tr.stats.accepted);
}

TEST_CASE("two-agent blow-up ends in a collision") {
  for (double a : {0.5, 0.9}) {
    const auto sc = scenario_blowup(a, 1.0, 1.0);
    const auto tr = integrate(sc.initial, sc.params, sc.integrator_cfg);
    REQUIRE(tr.termination.kind == TerminationKind::collision);
    CHECK(tr.termination.agents == std::pair<std::size_t, std::size_t>{0, 1});
    CHECK(tr.termination.t_lo <= tr.termination.t_hi);
    CHECK(tr.termination.t_hi - tr.termination.t_lo <= 1e-10 * sc.integrator_cfg.t_end * 1.0001);
    CHECK(tr.back().diag.min_gap_slack <= 2 * sc.integrator_cfg.collision_slack);
    for (const auto& s : tr.samples) CHECK(s.diag.min_gap_slack > 0.0);
  }
}

TEST_CASE("oracle stops at the first non-positive slack") {
  const auto sc = scenario_blowup(0.5, 1.0, 1.0);
  const auto tr = integrate_oracle(sc.initial, sc.params, 1e-4, 1.0);
  CHECK(tr.termination.kind == TerminationKind::collision);
  CHECK(tr.termination.t_hi <= 0.5);
  CHECK(tr.termination.t_hi - tr.termination.t_lo == doctest::Approx(1e-4));
}

TEST_CASE("step underflow is reported") {
  const auto sc = scenario_five_agent(FiveAgentCase::moving, 0.0);
  auto cfg = sc.integrator_cfg;
  cfg.rel_tol = 1e-30;
  cfg.abs_tol = 1e-300;
  cfg.h_min = 1e-6;
  cfg.h_init = 1e-3;
  cfg.t_end = 1.0;
  const auto tr = integrate(sc.initial, sc.params, cfg);
  CHECK(tr.termination.kind == TerminationKind::step_underflow);
  CHECK(to_string(tr.termination.kind) == "step_underflow");
}

TEST_CASE("adaptive and oracle agree and the oracle converges") {
  const auto sc = scenario_five_agent(FiveAgentCase::moving, -0.2);
  auto cfg = sc.integrator_cfg;
  cfg.t_end = 2.0;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-14;
  const auto ref = integrate(sc.initial, sc.params, cfg).back().state;
  auto err = [&](double h) {
    const auto s = integrate_oracle(sc.initial, sc.params, h, 2.0).back().state;
    return std::max(max_diff(s.x, ref.x), max_diff(s.v, ref.v));
  };
  const double e1 = err(1e-2), e2 = err(5e-3);
  CHECK(e1 < 1e-4);
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 21.0);
}

TEST_CASE("property: momentum and energy invariants along random traces") {
  gen::Rng r(17);
  for (int k = 0; k < 25; ++k) {
    auto [p, s] = gen::case_(r);
    p.alpha = r.uniform(2.0, 3.0);  // no collisions in this regime
    IntegratorConfig cfg;
    cfg.t_end = 3.0;
    cfg.sample_dt = 0.05;
    cfg.collision_slack = default_collision_slack(p);
    const auto tr = integrate(s, p, cfg);
    REQUIRE(tr.termination.kind == TerminationKind::reached_t_end);
    const double vm0 = tr.front().energy.v_mean;
    double vmax = 0.0;
    for (double v : s.v) vmax = std::max(vmax, std::abs(v));
    const double e0 = tr.front().energy.e_total;
    for (std::size_t i = 1; i < tr.samples.size(); ++i) {
      const auto& a = tr.samples[i - 1];
      const auto& b = tr.samples[i];
      CHECK(std::abs(b.energy.v_mean - vm0) <= 10 * (cfg.rel_tol * vmax + cfg.abs_tol));
      CHECK(b.energy.e_total <= a.energy.e_total + 10 * (cfg.rel_tol * e0 + cfg.abs_tol));
      CHECK(b.diag.min_gap_slack > 0.0);
    }
  }
}

TEST_CASE("property: order is preserved for ordered strings with alpha >= 1") {
  gen::Rng r(19);
  for (int k = 0; k < 25; ++k) {
    auto p = gen::params(r, static_cast<std::size_t>(r.integer(2, 8)));
    p.alpha = r.uniform(1.0, 3.0);
    State s;
    s.x = {0.0};
    for (std::size_t i = 0; i + 1 < p.n_agents(); ++i) s.x.push_back(s.x.back() + p.delta[i] + r.uniform(0.05, 2.0));
    for (std::size_t i = 0; i < p.n_agents(); ++i) s.v.push_back(r.uniform(-1, 1));
    IntegratorConfig cfg;
    cfg.t_end = 3.0;
    cfg.sample_dt = 0.05;
    const auto tr = integrate(s, p, cfg);
    CHECK(tr.termination.kind == TerminationKind::reached_t_end);
    for (const auto& smp : tr.samples)
      for (std::size_t i = 0; i + 1 < p.n_agents(); ++i) REQUIRE(smp.state.x[i + 1] > smp.state.x[i] + p.delta[i]);
  }
}

TEST_CASE("concurrent integrations are independent and deterministic") {
  const auto sc = scenario_ten_agent(1.025);
  auto cfg = sc.integrator_cfg;
  cfg.t_end = 5.0;
  const auto serial = integrate(sc.initial, sc.params, cfg);
  std::vector<std::future<Trace>> jobs;
  for (int k = 0; k < 4; ++k)
    jobs.push_back(std::async(std::launch::async, [&] { return integrate(sc.initial, sc.params, cfg); }));
  for (auto& j : jobs) {
    const auto tr = j.get();
    REQUIRE(tr.samples.size() == serial.samples.size());
    CHECK(tr.back().state.x == serial.back().state.x);
    CHECK(tr.back().state.v == serial.back().state.v);
  }
}
