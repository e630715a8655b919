#include "sflock/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sflock {

namespace {

std::string indexed(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

std::string labelled(const std::string& base, double value) {
  std::ostringstream os;
  os << base << "[gamma=" << value << "]";
  return os.str();
}

}  // namespace

std::string to_string(TheoremId id) {
  switch (id) {
    case TheoremId::existence_ordered:
      return "existence_ordered";
    case TheoremId::existence_unordered:
      return "existence_unordered";
    case TheoremId::blow_up:
      return "blow_up";
    case TheoremId::flocking:
      return "flocking";
    case TheoremId::exponential_formation:
      return "exponential_formation";
  }
  return "unknown";
}

bool ConditionReport::hypotheses_hold() const {
  return std::all_of(hypotheses.begin(), hypotheses.end(), [](const Hypothesis& h) { return h.holds; });
}

bool ConditionReport::conclusions_pass() const {
  return std::all_of(conclusion_checks.begin(), conclusion_checks.end(),
                     [](const ConclusionCheck& c) { return c.passed; });
}

const Hypothesis* ConditionReport::hypothesis(const std::string& name) const {
  for (const auto& h : hypotheses) {
    if (h.name == name) return &h;
  }
  return nullptr;
}

const ConclusionCheck* ConditionReport::conclusion(const std::string& name) const {
  for (const auto& c : conclusion_checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::optional<double> ConditionReport::constant(const std::string& name) const {
  auto it = derived_constants.find(name);
  if (it == derived_constants.end()) return std::nullopt;
  return it->second;
}

ConditionReport check_existence_regime(const State& initial, const ModelParams& params) {
  params.validate();
  initial.validate(params);
  const std::size_t links = params.delta.size();

  // Signed slacks for both orientations of the string.
  double up = std::numeric_limits<double>::infinity();
  double down = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < links; ++i) {
    up = std::min(up, initial.x[i + 1] - initial.x[i] - params.delta[i]);
    down = std::min(down, initial.x[i] - initial.x[i + 1] - params.delta[i]);
  }
  const auto slacks = gap_slacks(initial, params);
  const double min_slack = *std::min_element(slacks.begin(), slacks.end());

  const bool ordered = up > 0.0 || down > 0.0;
  const bool separated = min_slack > 0.0;
  const bool regime_a = params.alpha >= 1.0 && ordered;
  const bool regime_b = params.alpha >= 2.0 && separated;

  ConditionReport r;
  r.theorem_id = regime_a ? TheoremId::existence_ordered : TheoremId::existence_unordered;
  r.hypotheses.push_back({"alpha_ge_1", params.alpha >= 1.0, params.alpha});
  r.hypotheses.push_back({"ordered_separation", ordered, std::max(up, down)});
  r.hypotheses.push_back({"alpha_ge_2", params.alpha >= 2.0, params.alpha});
  r.hypotheses.push_back({"unordered_separation", separated, min_slack});
  r.derived_constants["regime_ordered"] = regime_a ? 1.0 : 0.0;
  r.derived_constants["regime_unordered"] = regime_b ? 1.0 : 0.0;
  r.derived_constants["min_gap_slack"] = min_slack;
  if (down > 0.0 && !(up > 0.0)) r.notes.push_back("string ordered with decreasing positions");
  if (std::any_of(params.delta.begin(), params.delta.end(), [](double d) { return d == 0.0; })) {
    r.notes.push_back("zero exclusion radius on some link: the kernel is singular at coincidence");
  }
  if (!regime_a && !regime_b) r.notes.push_back("no global existence guarantee for these data");
  return r;
}

double l_functional(const State& state, const ModelParams& params) {
  if (params.alpha < 2.0) throw std::domain_error("l_functional requires alpha >= 2");
  const auto slacks = gap_slacks(state, params);
  double sum = 0.0;
  for (double s : slacks) {
    if (!(s > 0.0)) throw std::overflow_error("l_functional diverges at a collapsed gap");
    sum += params.alpha == 2.0 ? std::log(s) : std::pow(s, -(params.alpha - 2.0));
  }
  return sum;
}

double formation_radius(const State& initial, const ModelParams& params) {
  const double e = energy(initial, params).e_total;
  return std::sqrt(phi_primitive_inverse(2.0 * e, params.beta));
}

ConditionReport check_flocking_condition(const State& initial, const ModelParams& params) {
  params.validate();
  initial.validate(params);
  ConditionReport r;
  r.theorem_id = TheoremId::flocking;

  const auto regime = check_existence_regime(initial, params);
  const bool exists = regime.derived_constants.at("regime_ordered") > 0.0 ||
                      regime.derived_constants.at("regime_unordered") > 0.0;
  r.hypotheses.push_back({"existence_regime", exists, regime.derived_constants.at("min_gap_slack")});

  const double e = energy(initial, params).e_total;
  const double integral = phi_integral(params.beta);
  const double threshold = 0.5 * integral;
  const bool holds = 2.0 * e < integral;
  r.hypotheses.push_back({"two_energy_below_phi_integral", holds, 2.0 * e});
  r.hypotheses.push_back({"energy_below_threshold", e < threshold, e});
  r.derived_constants["energy"] = e;
  r.derived_constants["threshold"] = threshold;
  r.derived_constants["threshold_2e"] = integral;
  r.derived_constants["condition_holds"] = holds ? 1.0 : 0.0;
  if (params.beta <= 1.0) r.notes.push_back("phi is not integrable: the condition holds for any data");
  if (holds) {
    r.derived_constants["rho"] = formation_radius(initial, params);
  }
  r.notes.push_back("rho uses the total initial energy; the per-link variant is ambiguous and not reported");
  return r;
}

ConditionReport blow_up_certificate(const State& initial, const ModelParams& params) {
  params.validate();
  initial.validate(params);
  if (params.n_agents() != 2) throw std::domain_error("the blow-up construction needs exactly two agents");

  const double a = params.alpha;
  const double gap = initial.x[1] - initial.x[0] - params.delta[0];
  const double dv = initial.v[0] - initial.v[1];

  ConditionReport r;
  r.theorem_id = TheoremId::blow_up;
  const bool alpha_ok = a > 0.0 && a < 1.0;
  r.hypotheses.push_back({"alpha_in_unit_interval", alpha_ok, a});
  r.hypotheses.push_back({"delta_plus_z_nonneg", params.delta[0] + params.z[0] >= 0.0, params.delta[0] + params.z[0]});
  r.hypotheses.push_back({"initial_gap_positive", gap > 0.0, gap});

  bool vel_ok = false;
  double residual = std::numeric_limits<double>::quiet_NaN();
  if (alpha_ok && gap > 0.0) {
    const double target = 2.0 / (1.0 - a) * std::pow(gap, 1.0 - a);
    residual = dv - target;
    vel_ok = std::abs(residual) <= 1e-12 * std::abs(target);
    r.derived_constants["velocity_target"] = target;
  }
  r.hypotheses.push_back({"velocity_condition", vel_ok, residual});
  if (r.hypotheses_hold()) {
    r.derived_constants["t_star_bound"] = std::pow(gap, a) * (1.0 - a) / (2.0 * a);
  }
  return r;
}

ConditionReport check_formation_constraint(const ModelParams& params, double rho) {
  params.validate();
  ConditionReport r;
  r.theorem_id = TheoremId::exponential_formation;
  for (std::size_t i = 0; i < params.z.size(); ++i) {
    const double margin = params.z[i] - params.delta[i];
    r.hypotheses.push_back({indexed("z_gt_delta", i), margin > 0.0, margin});
  }
  for (std::size_t i = 0; i < params.z.size(); ++i) {
    const double margin = params.z[i] - rho - params.delta[i];
    r.hypotheses.push_back({indexed("z_gt_rho_plus_delta", i), margin > 0.0, margin});
  }
  r.derived_constants["rho"] = rho;
  return r;
}

TraceTolerances default_tolerances(const Trace& trace, const IntegratorConfig& cfg, bool flocking_scenario) {
  TraceTolerances tol;
  const auto& first = trace.front();
  double vmax = 0.0;
  for (double v : first.state.v) vmax = std::max(vmax, std::abs(v));
  tol.mean_velocity = 10.0 * (cfg.rel_tol * vmax + cfg.abs_tol);
  tol.energy_monotone = 10.0 * (cfg.rel_tol * first.energy.e_total + cfg.abs_tol);
  double dmax = 0.0;
  for (const auto& s : trace.samples) {
    if (s.energy.dissipation) dmax = std::max(dmax, *s.energy.dissipation);
  }
  tol.energy_balance = 10.0 * cfg.sample_dt * cfg.sample_dt * cfg.t_end * dmax;
  if (flocking_scenario) {
    tol.velocity_diameter = 1e-3;
    tol.formation_error = 1e-3;
  }
  return tol;
}

double integrated_dissipation(const Trace& trace) {
  double sum = 0.0;
  for (std::size_t k = 1; k < trace.samples.size(); ++k) {
    const auto& a = trace.samples[k - 1];
    const auto& b = trace.samples[k];
    if (!a.energy.dissipation || !b.energy.dissipation) return std::numeric_limits<double>::infinity();
    sum += 0.5 * (b.state.t - a.state.t) * (*a.energy.dissipation + *b.energy.dissipation);
  }
  return sum;
}

ConditionReport verify_trace_certificates(const Trace& trace, const ModelParams& params, const TraceTolerances& tol) {
  if (trace.samples.empty()) throw std::invalid_argument("empty trace");
  ConditionReport r;
  r.theorem_id = TheoremId::flocking;

  const auto& first = trace.front();
  const auto& last = trace.back();
  double drift = 0.0;
  double rise = 0.0;
  double min_slack = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < trace.samples.size(); ++k) {
    const auto& s = trace.samples[k];
    drift = std::max(drift, std::abs(s.energy.v_mean - first.energy.v_mean));
    if (k > 0) rise = std::max(rise, s.energy.e_total - trace.samples[k - 1].energy.e_total);
    min_slack = std::min(min_slack, s.diag.min_gap_slack);
  }
  const double balance = std::abs(last.energy.e_total - first.energy.e_total + integrated_dissipation(trace));

  r.hypotheses.push_back({"observed_gap_infimum", min_slack > 0.0, min_slack});
  r.notes.push_back("observed_gap_infimum is a finite-horizon witness, not a proof");

  r.conclusion_checks.push_back({"mean_velocity_conserved", drift <= tol.mean_velocity, drift, tol.mean_velocity});
  r.conclusion_checks.push_back({"energy_non_increasing", rise <= tol.energy_monotone, rise, tol.energy_monotone});
  r.conclusion_checks.push_back({"energy_balance", balance <= tol.energy_balance, balance, tol.energy_balance});
  r.conclusion_checks.push_back({"collision_free", min_slack > 0.0, min_slack, 0.0});
  if (tol.velocity_diameter) {
    r.conclusion_checks.push_back({"flocking_achieved", last.diag.velocity_diameter < *tol.velocity_diameter,
                                   last.diag.velocity_diameter, *tol.velocity_diameter});
  }
  if (tol.formation_error) {
    r.conclusion_checks.push_back({"formation_acquired", last.diag.formation_error < *tol.formation_error,
                                   last.diag.formation_error, *tol.formation_error});
  }
  r.derived_constants["c_N"] = chain_constant(params.n_agents());
  r.derived_constants["initial_energy"] = first.energy.e_total;
  r.derived_constants["final_energy"] = last.energy.e_total;
  r.derived_constants["integrated_dissipation"] = integrated_dissipation(trace);
  return r;
}

RateFit fit_exponential_rate(const Trace& trace, const ModelParams& params, double gamma,
                             std::pair<double, double> window) {
  std::vector<double> ts;
  std::vector<double> ys;
  for (const auto& s : trace.samples) {
    if (s.state.t < window.first || s.state.t > window.second) continue;
    const double eg = modified_energy(s.state, params, gamma);
    if (!(eg > 0.0)) throw std::domain_error("modified energy is not positive inside the fit window");
    ts.push_back(s.state.t);
    ys.push_back(std::log(eg));
  }
  if (ts.size() < 3) throw std::invalid_argument("fewer than three samples in the fit window");

  const double n = static_cast<double>(ts.size());
  double tm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    tm += ts[i];
    ym += ys[i];
  }
  tm /= n;
  ym /= n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - tm) * (ts[i] - tm);
    sty += (ts[i] - tm) * (ys[i] - ym);
    syy += (ys[i] - ym) * (ys[i] - ym);
  }
  RateFit fit;
  fit.points = ts.size();
  fit.rate = sty / stt;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double pred = ym + fit.rate * (ts[i] - tm);
    ss_res += (ys[i] - pred) * (ys[i] - pred);
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

std::pair<double, double> default_rate_window(const Trace& trace) {
  const double t0 = trace.front().state.t;
  const double t1 = trace.back().state.t;
  return {t0 + 0.5 * (t1 - t0), t1};
}

double default_gamma(const Trace& trace, const ModelParams& params) {
  double rho = 0.0;
  for (const auto& s : trace.samples) rho = std::max(rho, s.diag.formation_error);
  const double phi_m = phi(rho * rho, params.beta);
  return 2.0 * std::max(std::sqrt(2.0 * static_cast<double>(params.n_agents()) / phi_m), 1.0);
}

void annotate_gamma(Trace& trace, const ModelParams& params, double gamma) {
  for (auto& s : trace.samples) s.energy.e_gamma = modified_energy(s.state, params, gamma);
}

ConditionReport check_exponential_formation(const Trace& trace, const ModelParams& params,
                                            const std::vector<double>& gammas, double min_r_squared) {
  ConditionReport r;
  r.theorem_id = TheoremId::exponential_formation;
  double min_slack = std::numeric_limits<double>::infinity();
  for (const auto& s : trace.samples) min_slack = std::min(min_slack, s.diag.min_gap_slack);
  r.hypotheses.push_back({"observed_gap_infimum", min_slack > 0.0, min_slack});
  r.notes.push_back("observed_gap_infimum is a finite-horizon witness, not a proof");

  const auto window = default_rate_window(trace);
  r.derived_constants["window_lo"] = window.first;
  r.derived_constants["window_hi"] = window.second;
  for (double g : gammas) {
    try {
      const RateFit fit = fit_exponential_rate(trace, params, g, window);
      r.conclusion_checks.push_back({labelled("decay_rate", g), fit.rate < 0.0, fit.rate, 0.0});
      r.conclusion_checks.push_back({labelled("fit_quality", g), fit.r_squared >= min_r_squared, fit.r_squared,
                                     min_r_squared});
      r.derived_constants[labelled("rate", g)] = fit.rate;
    } catch (const std::exception& e) {
      r.conclusion_checks.push_back({labelled("decay_rate", g), false, std::numeric_limits<double>::quiet_NaN(), 0.0});
      r.notes.push_back(labelled("fit_failed", g) + ": " + e.what());
    }
  }
  return r;
}

double chain_constant(std::size_t n_agents) {
  const double n = static_cast<double>(n_agents);
  return n * (n * n - 1.0) / 3.0;
}

}  // namespace sflock
