#pragma once

// JSON run configuration for the command line front end.
//
// Parsing errors are reported as ConfigError with the path of the
// offending field (for example "system.gamma[1].rate").

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "superrad/dynamics.hpp"
#include "superrad/error.hpp"
#include "superrad/generator.hpp"
#include "superrad/initial.hpp"
#include "superrad/model.hpp"

namespace superrad {

class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : ValidationError(path.empty() ? what : path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class Scenario { Pulse, Driven, PumpedSpectrum, Sweep, Bench };
enum class OutputFormat { Csv, JsonLines };
enum class Units { Absolute, Gamma10 };

/// Quantity extracted at every sweep point.
enum class SweepMeasure { Pulse, Steady, Spectrum };

struct InitialConfig {
  InitialStateSpec spec;
  /// Start from the steady state of the driven/pumped system instead.
  bool steady = false;
};

struct SweepConfig {
  /// atoms | pump | decay | dephasing | Gamma | Omega | drive | alpha
  std::string parameter;
  std::vector<double> values;
  SweepMeasure measure = SweepMeasure::Pulse;
};

struct BenchConfig {
  std::vector<int> atoms{50, 100, 250};
  int levels = 2;
  int steps = 5;  ///< generator applications timed per point
};

struct SpectrumConfig {
  double max_dtau = 0.1;
  bool fit = true;
};

struct RunConfig {
  int schema_version = 1;
  Scenario scenario = Scenario::Pulse;
  /// Declared unit system, echoed in the output header. With Gamma10 every
  /// rate and frequency is a multiple of Gamma_10 and times are in 1/Gamma_10.
  Units units = Units::Gamma10;
  SystemParams params;
  TermSet terms;
  InitialConfig initial;
  SolverConfig solver;
  std::vector<double> times;
  std::vector<double> omegas;
  SpectrumConfig spectrum;
  std::optional<SweepConfig> sweep;
  BenchConfig bench;
  std::string output_path = "output.csv";
  OutputFormat format = OutputFormat::Csv;

  /// Effective configuration after defaults, in the same schema it was read from.
  nlohmann::json effective;
};

RunConfig parse_config(const nlohmann::json& j);
/// Serialises a configuration; parse_config(to_json(c)) describes the same run.
nlohmann::json to_json(const RunConfig& c);
RunConfig load_config(const std::string& path);

std::string to_string(Scenario s);
std::string to_string(SweepMeasure m);

}  // namespace superrad
