#include "sflock/io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sflock {

using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double or_nan(const std::optional<double>& v) { return v ? *v : std::numeric_limits<double>::quiet_NaN(); }

std::optional<double> nan_to_empty(double v) {
  if (std::isnan(v)) return std::nullopt;
  return v;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

void write_row(std::ostream& os, const std::vector<double>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) os << ',';
    os << format_double(row[i]);
  }
  os << '\n';
}

void write_header(std::ostream& os, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) os << ',';
    os << cols[i];
  }
  os << '\n';
}

std::vector<double> as_vector(const json& j, const char* what) {
  if (!j.is_array()) throw std::invalid_argument(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : j) {
    if (!e.is_number()) throw std::invalid_argument(std::string(what) + " must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

double as_number(const json& j, const char* what) {
  if (!j.is_number()) throw std::invalid_argument(std::string(what) + " must be a number");
  return j.get<double>();
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw std::invalid_argument("malformed number '" + text + "'");
  return v;
}

std::vector<std::string> trace_columns(std::size_t n_agents) {
  std::vector<std::string> cols{"t"};
  for (std::size_t i = 1; i <= n_agents; ++i) cols.push_back("x_" + std::to_string(i));
  for (std::size_t i = 1; i <= n_agents; ++i) cols.push_back("v_" + std::to_string(i));
  for (const char* c : {"e1", "e2", "e_total", "dissipation", "e_gamma", "min_gap_slack", "formation_error",
                        "velocity_diameter"}) {
    cols.emplace_back(c);
  }
  return cols;
}

void write_trace_csv(std::ostream& os, const Trace& trace) {
  const std::size_t n = trace.samples.empty() ? 0 : trace.front().state.size();
  write_header(os, trace_columns(n));
  std::vector<double> row;
  for (const auto& s : trace.samples) {
    row.clear();
    row.push_back(s.state.t);
    row.insert(row.end(), s.state.x.begin(), s.state.x.end());
    row.insert(row.end(), s.state.v.begin(), s.state.v.end());
    row.push_back(s.energy.e1);
    row.push_back(s.energy.e2);
    row.push_back(s.energy.e_total);
    row.push_back(or_nan(s.energy.dissipation));
    row.push_back(or_nan(s.energy.e_gamma));
    row.push_back(s.diag.min_gap_slack);
    row.push_back(s.diag.formation_error);
    row.push_back(s.diag.velocity_diameter);
    write_row(os, row);
  }
}

Trace read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("empty trace file");
  const auto header = split(line, ',');
  std::size_t n = 0;
  for (const auto& h : header) {
    if (h.rfind("x_", 0) == 0) ++n;
  }
  if (n == 0 || header != trace_columns(n)) throw std::invalid_argument("unexpected trace header");

  Trace trace;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) throw std::invalid_argument("trace row has the wrong number of columns");
    std::vector<double> vals;
    vals.reserve(cells.size());
    for (const auto& c : cells) vals.push_back(parse_double(c));

    Sample s;
    std::size_t k = 0;
    s.state.t = vals[k++];
    s.state.x.assign(vals.begin() + 1, vals.begin() + 1 + static_cast<std::ptrdiff_t>(n));
    s.state.v.assign(vals.begin() + 1 + static_cast<std::ptrdiff_t>(n),
                     vals.begin() + 1 + 2 * static_cast<std::ptrdiff_t>(n));
    k = 1 + 2 * n;
    s.energy.e1 = vals[k++];
    s.energy.e2 = vals[k++];
    s.energy.e_total = vals[k++];
    s.energy.dissipation = nan_to_empty(vals[k++]);
    s.energy.e_gamma = nan_to_empty(vals[k++]);
    s.diag.min_gap_slack = vals[k++];
    s.diag.formation_error = vals[k++];
    s.diag.velocity_diameter = vals[k++];
    double m = 0.0;
    for (double v : s.state.v) m += v;
    s.energy.v_mean = m / static_cast<double>(n);
    trace.samples.push_back(std::move(s));
  }
  return trace;
}

void write_positions_csv(std::ostream& os, const Trace& trace) {
  const std::size_t n = trace.front().state.size();
  std::vector<std::string> cols{"t"};
  for (std::size_t i = 1; i <= n; ++i) cols.push_back("x_" + std::to_string(i));
  write_header(os, cols);
  std::vector<double> row;
  for (const auto& s : trace.samples) {
    row.assign(1, s.state.t);
    row.insert(row.end(), s.state.x.begin(), s.state.x.end());
    write_row(os, row);
  }
}

void write_energy_csv(std::ostream& os, const Trace& trace) {
  write_header(os, {"t", "e1", "e2", "e_total", "dissipation", "v_mean", "min_gap_slack"});
  for (const auto& s : trace.samples) {
    write_row(os, {s.state.t, s.energy.e1, s.energy.e2, s.energy.e_total, or_nan(s.energy.dissipation),
                   s.energy.v_mean, s.diag.min_gap_slack});
  }
}

void write_errors_csv(std::ostream& os, const Trace& trace, const ModelParams& params) {
  std::vector<std::string> cols{"t"};
  for (std::size_t i = 1; i <= params.z.size(); ++i) cols.push_back("err_" + std::to_string(i));
  cols.emplace_back("formation_error");
  cols.emplace_back("velocity_diameter");
  write_header(os, cols);
  std::vector<double> row;
  for (const auto& s : trace.samples) {
    row.assign(1, s.state.t);
    const auto err = formation_errors(s.state, params);
    row.insert(row.end(), err.begin(), err.end());
    row.push_back(s.diag.formation_error);
    row.push_back(s.diag.velocity_diameter);
    write_row(os, row);
  }
}

json to_json(const Trace& trace) {
  json samples = json::array();
  for (const auto& s : trace.samples) {
    samples.push_back({{"t", s.state.t},
                       {"x", s.state.x},
                       {"v", s.state.v},
                       {"e1", s.energy.e1},
                       {"e2", s.energy.e2},
                       {"e_total", s.energy.e_total},
                       {"dissipation", optional_json(s.energy.dissipation)},
                       {"e_gamma", optional_json(s.energy.e_gamma)},
                       {"v_mean", s.energy.v_mean},
                       {"min_gap_slack", s.diag.min_gap_slack},
                       {"formation_error", s.diag.formation_error},
                       {"velocity_diameter", s.diag.velocity_diameter}});
  }
  const auto& term = trace.termination;
  json termination{{"kind", to_string(term.kind)}, {"t_lo", term.t_lo}, {"t_hi", term.t_hi}};
  if (term.kind == TerminationKind::collision) termination["agents"] = {term.agents.first, term.agents.second};
  return {{"samples", samples},
          {"termination", termination},
          {"stats",
           {{"accepted", trace.stats.accepted},
            {"rejected", trace.stats.rejected},
            {"rhs_evals", trace.stats.rhs_evals}}}};
}

json to_json(const ConditionReport& report) {
  json hyps = json::array();
  for (const auto& h : report.hypotheses) {
    hyps.push_back({{"name", h.name}, {"holds", h.holds}, {"witness", finite_or_string(h.witness)}});
  }
  json checks = json::array();
  for (const auto& c : report.conclusion_checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"measured", finite_or_string(c.measured)},
                      {"tolerance", finite_or_string(c.tolerance)}});
  }
  json constants = json::object();
  for (const auto& [k, v] : report.derived_constants) constants[k] = finite_or_string(v);
  return {{"theorem_id", to_string(report.theorem_id)},
          {"hypotheses", hyps},
          {"conclusion_checks", checks},
          {"derived_constants", constants},
          {"notes", report.notes}};
}

json to_json(const Scenario& s) {
  json expected = json::object();
  for (const auto& e : s.expected) expected[e.name] = e.expected;
  const auto& c = s.integrator_cfg;
  return {{"name", s.name},
          {"builder", {{"name", s.builder}, {"args", s.builder_args}}},
          {"params",
           {{"alpha", s.params.alpha},
            {"beta", s.params.beta},
            {"delta", s.params.delta},
            {"z", s.params.z},
            {"control", s.params.control}}},
          {"initial", {{"t", s.initial.t}, {"x", s.initial.x}, {"v", s.initial.v}}},
          {"integrator",
           {{"rel_tol", c.rel_tol},
            {"abs_tol", c.abs_tol},
            {"h_init", c.h_init},
            {"h_min", c.h_min},
            {"h_max", c.h_max},
            {"t_end", c.t_end},
            {"collision_slack", c.collision_slack},
            {"sample_dt", c.sample_dt}}},
          {"expected", expected},
          {"flocking", s.flocking},
          {"blow_up", s.blow_up}};
}

namespace {

Scenario scenario_from_json_unchecked(const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("scenario document must be an object");
  Scenario s;
  s.builder = "explicit";

  if (doc.contains("builder")) {
    const auto& b = doc.at("builder");
    const std::string name = b.is_string() ? b.get<std::string>() : b.at("name").get<std::string>();
    if (name != "explicit") {
      std::map<std::string, double> args;
      if (b.is_object() && b.contains("args")) {
        for (const auto& [k, v] : b.at("args").items()) args[k] = as_number(v, "builder argument");
      }
      if (name == "five") {
        s = scenario_five_agent(args.count("moving") && args["moving"] != 0.0 ? FiveAgentCase::moving
                                                                             : FiveAgentCase::at_rest,
                                args.count("v_mean") ? args["v_mean"] : 0.0,
                                static_cast<std::uint64_t>(args.count("seed") ? args["seed"] : kDefaultSeed));
      } else if (name == "ten") {
        s = scenario_ten_agent(args.count("beta") ? args["beta"] : 1.025,
                               !args.count("control") || args["control"] != 0.0,
                               static_cast<std::uint64_t>(args.count("seed") ? args["seed"] : kDefaultSeed));
      } else if (name == "blowup") {
        s = scenario_blowup(args.count("alpha") ? args["alpha"] : 0.5, args.count("gap0") ? args["gap0"] : 1.0,
                            args.count("delta1") ? args["delta1"] : 1.0);
      } else {
        s = builtin_scenario(name);
      }
    }
  } else if (!doc.contains("params") || !doc.contains("initial")) {
    throw std::invalid_argument("scenario needs either a builder or explicit params and initial data");
  }

  if (doc.contains("name")) s.name = doc.at("name").get<std::string>();
  if (doc.contains("params")) {
    const auto& p = doc.at("params");
    if (p.contains("alpha")) s.params.alpha = as_number(p.at("alpha"), "alpha");
    if (p.contains("beta")) s.params.beta = as_number(p.at("beta"), "beta");
    if (p.contains("delta")) s.params.delta = as_vector(p.at("delta"), "delta");
    if (p.contains("z")) s.params.z = as_vector(p.at("z"), "z");
    if (p.contains("control")) s.params.control = p.at("control").get<bool>();
  }
  if (doc.contains("initial") && doc.at("initial").is_object()) {
    const auto& i = doc.at("initial");
    if (i.contains("t")) s.initial.t = as_number(i.at("t"), "initial.t");
    if (i.contains("x")) s.initial.x = as_vector(i.at("x"), "initial.x");
    if (i.contains("v")) s.initial.v = as_vector(i.at("v"), "initial.v");
  }
  bool slack_given = false;
  if (doc.contains("integrator")) {
    auto& c = s.integrator_cfg;
    for (const auto& [k, v] : doc.at("integrator").items()) {
      const double val = as_number(v, k.c_str());
      if (k == "rel_tol") c.rel_tol = val;
      else if (k == "abs_tol") c.abs_tol = val;
      else if (k == "h_init") c.h_init = val;
      else if (k == "h_min") c.h_min = val;
      else if (k == "h_max") c.h_max = val;
      else if (k == "t_end") c.t_end = val;
      else if (k == "collision_slack") { c.collision_slack = val; slack_given = true; }
      else if (k == "sample_dt") c.sample_dt = val;
      else throw std::invalid_argument("unknown integrator setting '" + k + "'");
    }
  }
  if (doc.contains("expected")) {
    s.expected.clear();
    for (const auto& [k, v] : doc.at("expected").items()) s.expected.push_back({k, v.get<bool>()});
  }
  if (doc.contains("flocking")) s.flocking = doc.at("flocking").get<bool>();
  if (doc.contains("blow_up")) s.blow_up = doc.at("blow_up").get<bool>();

  s.params.validate();
  s.initial.validate(s.params);
  if (s.builder == "explicit" && !slack_given) s.integrator_cfg.collision_slack = default_collision_slack(s.params);
  s.integrator_cfg.validate();
  if (s.name.empty()) s.name = "custom";
  return s;
}

}  // namespace

Scenario scenario_from_json(const json& doc) {
  try {
    return scenario_from_json_unchecked(doc);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed scenario document: ") + e.what());
  }
}

void write_report_text(std::ostream& os, const ConditionReport& report) {
  os << "[" << to_string(report.theorem_id) << "]\n";
  for (const auto& h : report.hypotheses) {
    os << "hypothesis " << h.name << " = " << (h.holds ? "true" : "false") << " ; witness = "
       << format_double(h.witness) << '\n';
  }
  for (const auto& c : report.conclusion_checks) {
    os << "conclusion " << c.name << " = " << (c.passed ? "pass" : "fail") << " ; measured = "
       << format_double(c.measured) << " ; tolerance = " << format_double(c.tolerance) << '\n';
  }
  for (const auto& [k, v] : report.derived_constants) os << "constant " << k << " = " << format_double(v) << '\n';
  for (const auto& n : report.notes) os << "note " << n << '\n';
  os << '\n';
}

void write_run_text(std::ostream& os, const RunResult& result) {
  const auto& term = result.trace.termination;
  os << "scenario " << result.scenario.name << '\n';
  os << "termination " << to_string(term.kind) << " ; t_lo = " << format_double(term.t_lo)
     << " ; t_hi = " << format_double(term.t_hi);
  if (term.kind == TerminationKind::collision) {
    os << " ; agents = " << term.agents.first + 1 << "," << term.agents.second + 1;
  }
  os << '\n';
  os << "steps accepted = " << result.trace.stats.accepted << " ; rejected = " << result.trace.stats.rejected
     << " ; rhs_evals = " << result.trace.stats.rhs_evals << '\n';
  os << "gamma " << format_double(result.gamma) << "\n\n";
  os << "[outcomes]\n";
  for (const auto& [name, value] : result.outcomes) os << name << ": " << (value ? "true" : "false") << '\n';
  os << '\n';
  for (const auto& r : result.reports) write_report_text(os, r);
  os << "[expectations]\n";
  for (const auto& e : result.expectations) {
    os << "expect " << e.name << " = " << (e.expected ? "true" : "false") << " ; observed = "
       << (e.observed ? (*e.observed ? "true" : "false") : "undecided") << " ; " << (e.met() ? "met" : "MISMATCH")
       << '\n';
  }
}

}  // namespace sflock
