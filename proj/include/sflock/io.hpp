#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sflock/analysis.hpp"
#include "sflock/experiment.hpp"
#include "sflock/integrator.hpp"
#include "sflock/scenarios.hpp"

namespace sflock {

/// Shortest decimal text with 17 significant digits; "nan"/"inf" spelled out.
std::string format_double(double value);
/// Inverse of format_double. Throws std::invalid_argument on malformed input.
double parse_double(const std::string& text);

/// t, x_1..x_N, v_1..v_N, e1, e2, e_total, dissipation, e_gamma,
/// min_gap_slack, formation_error, velocity_diameter.
std::vector<std::string> trace_columns(std::size_t n_agents);
void write_trace_csv(std::ostream& os, const Trace& trace);
/// Reads samples back; termination and stats are not part of the format.
Trace read_trace_csv(std::istream& is);

void write_positions_csv(std::ostream& os, const Trace& trace);
void write_energy_csv(std::ostream& os, const Trace& trace);
void write_errors_csv(std::ostream& os, const Trace& trace, const ModelParams& params);

nlohmann::json to_json(const Trace& trace);
nlohmann::json to_json(const ConditionReport& report);
nlohmann::json to_json(const Scenario& scenario);
/// Accepts explicit initial data or a builder reference; throws
/// std::invalid_argument on schema errors.
Scenario scenario_from_json(const nlohmann::json& doc);

/// Structured text rendering of a certificate report.
void write_report_text(std::ostream& os, const ConditionReport& report);
void write_run_text(std::ostream& os, const RunResult& result);

}  // namespace sflock
