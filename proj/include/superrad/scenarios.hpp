#pragma once

// Scenario drivers behind the command line tool.

#include <iosfwd>
#include <string>
#include <vector>

#include "superrad/config.hpp"
#include "superrad/lorentz_fit.hpp"

namespace superrad {

inline constexpr int kOutputSchemaVersion = 1;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  nlohmann::json summary = nlohmann::json::object();
};

struct RunOptions {
  std::string output_dir = ".";
  int jobs = 1;
  bool verify_oracle = false;
  bool dump_generator = false;
};

/// Column names of observable rows for s levels (after "t").
std::vector<std::string> observable_columns(int levels);
std::vector<double> observable_row(const ObservableRecord& r, int levels);

/// Scenario-specific computation; no files are written.
Table run_scenario(const RunConfig& cfg, int jobs = 1);

/// Output with a '#' header (schema version, effective config, summary).
void write_table(const Table& t, const RunConfig& cfg, std::ostream& os);

/// Generator of a reduced copy of the system (N <= 3) compared entry by
/// entry with the full-space reference. Returns the largest deviation and
/// throws ConsistencyError above 1e-9 relative to the largest entry.
double verify_against_oracle(const RunConfig& cfg);

/// Full run: optional oracle check and generator dump, then the scenario.
/// Returns the path of the main output file.
std::string run(const RunConfig& cfg, const RunOptions& opts);

/// Exit status for an exception escaping run():
/// 2 configuration, 3 capacity, 4 non-convergence or stiffness,
/// 5 invariant violation, 1 anything else.
int exit_code_for(const std::exception& e);

/// Number of local maxima of a sampled series (plateaus count once).
int count_local_maxima(const std::vector<double>& y, double rel_prominence = 1e-6);

}  // namespace superrad
