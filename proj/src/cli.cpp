#include "sflock/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "sflock/io.hpp"

namespace sflock::cli {

namespace fs = std::filesystem;

namespace {

double parse_number(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size() || !std::isfinite(v)) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("override " + key + " expects a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  throw std::invalid_argument("override " + key + " expects a boolean, got '" + value + "'");
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
}

std::string value_tag(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void scale_velocity_spread(State& s, double factor) {
  double m = 0.0;
  for (double v : s.v) m += v;
  m /= static_cast<double>(s.v.size());
  for (double& v : s.v) v = m + factor * (v - m);
}

}  // namespace

Formats parse_formats(const std::string& text) {
  Formats f{false, false};
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    if (item == "csv") {
      f.csv = true;
    } else if (item == "json" || item == "structured-json") {
      f.json = true;
    } else {
      throw std::invalid_argument("unknown output format '" + item + "'");
    }
  }
  if (!f.csv && !f.json) throw std::invalid_argument("no output format selected");
  return f;
}

void apply_override(Scenario& s, RunOptions& options, const std::string& key, const std::string& value) {
  if (key == "alpha" || key == "beta") {
    const double v = parse_number(key, value);
    if (!(v > 0.0)) throw std::invalid_argument(key + " must be positive");
    if (!rebuild_with(s, key, v)) (key == "alpha" ? s.params.alpha : s.params.beta) = v;
  } else if (key == "t_end") {
    const double v = parse_number(key, value);
    if (!(v > 0.0)) throw std::invalid_argument("t_end must be positive");
    s.integrator_cfg.t_end = v;
  } else if (key == "seed") {
    const double v = parse_number(key, value);
    if (v < 0.0 || v != std::floor(v)) throw std::invalid_argument("seed must be a non-negative integer");
    if (!rebuild_with(s, "seed", v)) throw std::invalid_argument("scenario " + s.name + " takes no seed");
  } else if (key == "gamma") {
    const double v = parse_number(key, value);
    if (!(v > 0.0)) throw std::invalid_argument("gamma must be positive");
    options.gamma = v;
  } else if (key == "control_enabled") {
    const bool on = parse_bool(key, value);
    if (!rebuild_with(s, "control", on ? 1.0 : 0.0)) s.params.control = on;
  } else {
    throw std::invalid_argument("unknown override '" + key + "'");
  }
  s.params.validate();
}

Scenario load_scenario(const RunConfig& cfg, RunOptions& options) {
  Scenario s;
  if (!cfg.config_path.empty()) {
    std::ifstream is(cfg.config_path);
    if (!is) throw std::invalid_argument("cannot read config " + cfg.config_path);
    nlohmann::json doc;
    try {
      is >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("malformed config " + cfg.config_path + ": " + e.what());
    }
    try {
      s = scenario_from_json(doc);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("invalid config " + cfg.config_path + ": " + e.what());
    }
  } else {
    s = builtin_scenario(cfg.scenario.empty() ? "five-at-rest" : cfg.scenario);
  }
  if (cfg.seed) apply_override(s, options, "seed", std::to_string(*cfg.seed));
  for (const auto& [k, v] : cfg.overrides) apply_override(s, options, k, v);
  return s;
}

void write_outputs(const std::string& dir, const RunResult& result, const Formats& formats) {
  const fs::path base(dir);
  ensure_dir(base);
  if (formats.csv) {
    auto trace = open_out(base / "trace.csv");
    write_trace_csv(trace, result.trace);
    auto pos = open_out(base / "positions.csv");
    write_positions_csv(pos, result.trace);
    auto en = open_out(base / "energy.csv");
    write_energy_csv(en, result.trace);
    auto er = open_out(base / "errors.csv");
    write_errors_csv(er, result.trace, result.scenario.params);
  }
  if (formats.json) {
    auto tj = open_out(base / "trace.json");
    tj << to_json(result.trace).dump() << '\n';
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& r : result.reports) reports.push_back(to_json(r));
    nlohmann::json expectations = nlohmann::json::array();
    for (const auto& e : result.expectations) {
      expectations.push_back({{"name", e.name},
                              {"expected", e.expected},
                              {"observed", e.observed ? nlohmann::json(*e.observed) : nlohmann::json(nullptr)},
                              {"met", e.met()}});
    }
    auto cj = open_out(base / "certificates.json");
    cj << nlohmann::json{{"reports", reports}, {"expectations", expectations}, {"gamma", result.gamma}}.dump(2)
       << '\n';
    auto sj = open_out(base / "scenario.json");
    sj << to_json(result.scenario).dump(2) << '\n';
  }
  auto ct = open_out(base / "certificates.txt");
  write_run_text(ct, result);
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  RunOptions options;
  Scenario s;
  try {
    s = load_scenario(cfg, options);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  RunResult result;
  try {
    result = run_scenario(s, options);
    write_outputs(cfg.out_dir, result, cfg.formats);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  write_run_text(out, result);
  const int code = result.exit_code();
  if (code == kExitCollision) {
    out << "collision at t in [" << format_double(result.trace.termination.t_lo) << ", "
        << format_double(result.trace.termination.t_hi) << "]\n";
  } else if (code == kExitFailure) {
    err << "integrator failure: step size underflow at t = " << format_double(result.trace.termination.t_lo)
        << '\n';
  }
  return code;
}

int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  RunOptions options;
  try {
    const Scenario s = load_scenario(cfg, options);
    out << "scenario " << s.name << "\n\n";
    for (const auto& r : initial_reports(s)) write_report_text(out, r);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::string& param = cfg.sweep_param;
  if (param != "alpha" && param != "beta" && param != "gamma" && param != "v-scale") {
    err << "error: unknown sweep parameter '" << param << "' (expected alpha, beta, gamma or v-scale)\n";
    return kExitFailure;
  }
  if (cfg.sweep_values.empty()) {
    err << "error: no sweep values\n";
    return kExitFailure;
  }
  RunOptions base_options;
  Scenario base;
  try {
    base = load_scenario(cfg, base_options);
    ensure_dir(cfg.out_dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  struct Row {
    double value = 0.0;
    std::string line;
    std::string error;
  };
  auto job = [&](double value) {
    Row row{value, {}, {}};
    try {
      Scenario s = base;
      RunOptions options = base_options;
      if (param == "gamma") {
        if (!(value > 0.0)) throw std::invalid_argument("gamma must be positive");
        options.gamma = value;
      } else if (param == "v-scale") {
        scale_velocity_spread(s.initial, value);
      } else {
        apply_override(s, options, param, format_double(value));
      }
      const RunResult r = run_scenario(s, options);
      write_outputs((fs::path(cfg.out_dir) / (param + "_" + value_tag(value))).string(), r, cfg.formats);

      const auto flock = check_flocking_condition(s.initial, s.params);
      double rate = std::nan(""), r2 = std::nan("");
      try {
        const auto fit = fit_exponential_rate(r.trace, s.params, r.gamma, default_rate_window(r.trace));
        rate = fit.rate;
        r2 = fit.r_squared;
      } catch (const std::exception&) {
      }
      double min_slack = r.trace.front().diag.min_gap_slack;
      for (const auto& smp : r.trace.samples) min_slack = std::min(min_slack, smp.diag.min_gap_slack);
      std::ostringstream os;
      os << param << ',' << format_double(value) << ','
         << (flock.constant("condition_holds").value_or(0.0) > 0.0 ? "true" : "false") << ','
         << format_double(*flock.constant("energy")) << ',' << format_double(*flock.constant("threshold")) << ','
         << format_double(flock.constant("rho").value_or(std::nan(""))) << ','
         << to_string(r.trace.termination.kind) << ',' << format_double(r.trace.back().diag.formation_error) << ','
         << format_double(r.trace.back().diag.velocity_diameter) << ',' << format_double(min_slack) << ','
         << format_double(r.gamma) << ',' << format_double(rate) << ',' << format_double(r2);
      row.line = os.str();
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    return row;
  };

  std::vector<std::future<Row>> futures;
  for (double v : cfg.sweep_values) futures.push_back(std::async(std::launch::async, job, v));
  std::vector<Row> rows;
  for (auto& f : futures) rows.push_back(f.get());

  const std::string header =
      "param,value,flocking_condition,energy,threshold,rho,termination,final_formation_error,"
      "final_velocity_diameter,min_gap_slack,gamma,rate,r_squared";
  std::ofstream summary(fs::path(cfg.out_dir) / "summary.csv");
  summary << header << '\n';
  out << header << '\n';
  int code = kExitOk;
  for (const auto& row : rows) {
    if (!row.error.empty()) {
      err << "error: " << param << "=" << row.value << ": " << row.error << '\n';
      code = kExitFailure;
      continue;
    }
    summary << row.line << '\n';
    out << row.line << '\n';
  }
  return code;
}

int cmd_blowup(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<std::pair<double, double>> cases = cfg.blowup_cases;
  if (cases.empty()) cases = {{0.5, 1.0}, {0.9, 1.0}, {0.5, 4.0}};
  try {
    ensure_dir(cfg.out_dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  struct Row {
    std::string line;
    bool ok = false;
    std::string error;
  };
  auto job = [&](std::pair<double, double> c) {
    Row row;
    try {
      const Scenario s = scenario_blowup(c.first, c.second, cfg.blowup_delta);
      const RunResult r = run_scenario(s);
      write_outputs((fs::path(cfg.out_dir) / s.name).string(), r, cfg.formats);
      const double bound = *blow_up_certificate(s.initial, s.params).constant("t_star_bound");
      const Trace oracle =
          integrate_oracle(s.initial, s.params, cfg.oracle_h, s.integrator_cfg.t_end, bound / 100.0);
      const bool both_collide = r.trace.termination.kind == TerminationKind::collision &&
                                oracle.termination.kind == TerminationKind::collision;
      const double t_adaptive = r.trace.termination.t_hi;
      const double t_oracle = oracle.termination.t_hi;
      const bool agree = both_collide && std::abs(t_adaptive - t_oracle) <= 1e-4;
      const double limit = bound * (1.0 + 1e-6);
      const bool below = both_collide && t_adaptive <= limit && t_oracle <= limit;
      row.ok = agree && below && r.all_met();
      std::ostringstream os;
      os << format_double(c.first) << ',' << format_double(c.second) << ',' << format_double(cfg.blowup_delta)
         << ',' << format_double(bound) << ',' << format_double(t_adaptive) << ',' << format_double(t_oracle) << ','
         << (agree ? "true" : "false") << ',' << (below ? "true" : "false");
      row.line = os.str();
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    return row;
  };

  std::vector<std::future<Row>> futures;
  for (const auto& c : cases) futures.push_back(std::async(std::launch::async, job, c));

  const std::string header = "alpha,gap0,delta1,t_star_bound,t_adaptive,t_oracle,times_agree,below_bound";
  std::ofstream summary(fs::path(cfg.out_dir) / "blowup_summary.csv");
  summary << header << '\n';
  out << header << '\n';
  int code = kExitOk;
  for (auto& f : futures) {
    const Row row = f.get();
    if (!row.error.empty()) {
      err << "error: " << row.error << '\n';
      return kExitFailure;
    }
    summary << row.line << '\n';
    out << row.line << '\n';
    if (!row.ok) code = kExitMismatch;
  }
  return code;
}

int cmd_reproduce(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  RunOptions options;
  options.formation_threshold = cfg.formation_threshold;
  try {
    ensure_dir(cfg.out_dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  std::vector<std::future<RunResult>> futures;
  for (const auto& name : builtin_names()) {
    futures.push_back(std::async(std::launch::async, [name, options] {
      return run_scenario(builtin_scenario(name), options);
    }));
  }

  std::ofstream summary(fs::path(cfg.out_dir) / "summary.csv");
  summary << "scenario,expectation,expected,observed,met\n";
  out << "scenario                        expectation                 expected  observed  met\n";
  std::vector<std::string> mismatches;
  for (auto& f : futures) {
    RunResult r;
    try {
      r = f.get();
      write_outputs((fs::path(cfg.out_dir) / r.scenario.name).string(), r, cfg.formats);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitFailure;
    }
    for (const auto& e : r.expectations) {
      const std::string obs = e.observed ? (*e.observed ? "true" : "false") : "undecided";
      summary << r.scenario.name << ',' << e.name << ',' << (e.expected ? "true" : "false") << ',' << obs << ','
              << (e.met() ? "true" : "false") << '\n';
      char line[160];
      std::snprintf(line, sizeof line, "%-31s %-27s %-9s %-9s %s\n", r.scenario.name.c_str(), e.name.c_str(),
                    e.expected ? "true" : "false", obs.c_str(), e.met() ? "yes" : "NO");
      out << line;
      if (!e.met()) mismatches.push_back(r.scenario.name + ": " + e.name);
    }
  }
  if (!mismatches.empty()) {
    err << mismatches.size() << " expectation(s) not met:\n";
    for (const auto& m : mismatches) err << "  " << m << '\n';
    return kExitMismatch;
  }
  out << "all expectations met\n";
  return kExitOk;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and certificate checks for strings of agents with singular alignment and formation "
               "control"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string formats = "csv,json";
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", cfg.scenario, "builtin scenario name");
    sub->add_option("--config", cfg.config_path, "scenario document (JSON)");
    sub->add_option("--out", cfg.out_dir, "output directory");
    sub->add_option("--formats", formats, "comma separated subset of csv,json");
    sub->add_option("--override", overrides, "key=value (alpha, beta, t_end, seed, gamma, control_enabled)");
    sub->add_option("--seed", seed, "seed for generated initial data");
  };

  auto* run = app.add_subcommand("run", "integrate one scenario and write trace and certificates");
  add_common(run);
  auto* check = app.add_subcommand("check", "evaluate the hypotheses on the initial data only");
  add_common(check);
  auto* sweep = app.add_subcommand("sweep", "run a scenario for several values of one parameter");
  add_common(sweep);
  sweep->add_option("--param", cfg.sweep_param, "alpha, beta, gamma or v-scale")->required();
  sweep->add_option("--values", cfg.sweep_values, "values")->required()->delimiter(',');
  auto* blowup = app.add_subcommand("blowup", "two-agent finite-time collision suite");
  add_common(blowup);
  std::vector<std::string> cases;
  blowup->add_option("--case", cases, "alpha:gap0 (repeatable)");
  blowup->add_option("--delta", cfg.blowup_delta, "exclusion radius");
  blowup->add_option("--oracle-h", cfg.oracle_h, "fixed step of the RK4 oracle");
  auto* reproduce = app.add_subcommand("reproduce", "run every builtin scenario against its expectations");
  add_common(reproduce);
  reproduce->add_option("--formation-threshold", cfg.formation_threshold, "final formation error threshold");

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  try {
    cfg.formats = parse_formats(formats);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos || eq == 0) throw std::invalid_argument("override must be key=value: " + o);
      cfg.overrides.emplace_back(o.substr(0, eq), o.substr(eq + 1));
    }
    for (const auto& c : cases) {
      const auto colon = c.find(':');
      if (colon == std::string::npos) throw std::invalid_argument("case must be alpha:gap0: " + c);
      cfg.blowup_cases.emplace_back(std::stod(c.substr(0, colon)), std::stod(c.substr(colon + 1)));
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  auto seed_given = [&](CLI::App* sub) { return sub->count("--seed") > 0; };
  if (*run) {
    if (seed_given(run)) cfg.seed = seed;
    return cmd_run(cfg, out, err);
  }
  if (*check) {
    if (seed_given(check)) cfg.seed = seed;
    return cmd_check(cfg, out, err);
  }
  if (*sweep) {
    if (seed_given(sweep)) cfg.seed = seed;
    if (cfg.scenario.empty() && cfg.config_path.empty()) cfg.scenario = "ten-beta1.025";
    return cmd_sweep(cfg, out, err);
  }
  if (*blowup) return cmd_blowup(cfg, out, err);
  return cmd_reproduce(cfg, out, err);
}

}  // namespace sflock::cli
