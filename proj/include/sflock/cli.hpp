#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sflock/experiment.hpp"
#include "sflock/scenarios.hpp"

namespace sflock::cli {

enum class Command { run, check, sweep, blowup, reproduce };

struct Formats {
  bool csv = true;
  bool json = true;
};

struct RunConfig {
  Command command = Command::run;
  std::string scenario;     // builtin name
  std::string config_path;  // JSON scenario document
  std::string out_dir = "out";
  Formats formats;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::optional<std::uint64_t> seed;

  // sweep
  std::string sweep_param;
  std::vector<double> sweep_values;

  // blowup
  std::vector<std::pair<double, double>> blowup_cases;  // (alpha, gap0); empty = builtin suite
  double blowup_delta = 1.0;
  double oracle_h = 1e-6;

  // reproduce
  double formation_threshold = 1e-3;
};

/// Exit codes: 0 success, 1 usage or integrator failure, 2 collision
/// termination (run), 3 expectation mismatch (reproduce, blowup).
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitCollision = 2;
inline constexpr int kExitMismatch = 3;

Formats parse_formats(const std::string& text);

/// Resolves scenario source, seed and overrides into a runnable scenario.
/// Throws std::invalid_argument on unknown keys or malformed values.
Scenario load_scenario(const RunConfig& cfg, RunOptions& options);

/// Applies one `key=value` override.
void apply_override(Scenario& scenario, RunOptions& options, const std::string& key, const std::string& value);

/// Writes trace, plot data and certificates for one run into `dir`.
void write_outputs(const std::string& dir, const RunResult& result, const Formats& formats);

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_blowup(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_reproduce(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses the command line and dispatches.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sflock::cli
