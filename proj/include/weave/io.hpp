#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "json.hpp"

#include "weave/calibration.hpp"
#include "weave/dataset.hpp"
#include "weave/equilibrium.hpp"
#include "weave/flow_model.hpp"
#include "weave/metrics.hpp"

namespace weave::io {

// Parsed INI-style run configuration:
//
//   [flows]          either f_enter, f_exit, f2 (veh/h, optional f1)
//                    or n_enter, n_exit, n2 (ratios), never both
//   [coefficients]   alpha beta omega gamma rho delta (required),
//                    c1_t c2_t c1_m c2_m (default 1)
//   [options]        free-form key = value pairs for the command
struct ConfigFile {
  std::string source;
  std::optional<FlowRates> rates;
  std::optional<FlowConfiguration> flows;
  std::optional<CostCoefficients> coeffs;
  std::map<std::string, std::string> options;
};

ConfigFile parse_config(std::istream& in, const std::string& source = "<config>");
ConfigFile read_config(const std::filesystem::path& path);

// Throw ParseError naming the missing section.
FlowConfiguration require_flows(const ConfigFile& cfg);
CostCoefficients require_coefficients(const ConfigFile& cfg);

// Reads a coefficients file (a config holding a [coefficients] section).
CostCoefficients read_coefficients(const std::filesystem::path& path);
void write_coefficients(std::ostream& out, const CostCoefficients& coeffs,
                        const std::string& comment = {});

// Dataset CSV: scenario_id,n_enter,n_exit,n2,x1_s,x1_b,weight with floats
// at 9 significant digits.
inline constexpr const char* kDatasetHeader = "scenario_id,n_enter,n_exit,n2,x1_s,x1_b,weight";
// Simplex slack accepted when reading values printed at 9 significant
// digits.
inline constexpr double kFileSimplexTolerance = 1e-8;

void write_dataset_csv(std::ostream& out, const Dataset& data);
// Accepts the CSV above or JSON (a single solve object, an array of them,
// or {"points": [...]}).
Dataset read_dataset(std::istream& in, const std::string& source = "<dataset>");
Dataset read_dataset(const std::filesystem::path& path);

// Fixed-width decimal rendering with `digits` significant digits.
std::string format_sig(double value, int digits);
// Two-decimal percentage, e.g. "130.05%".
std::string format_percent(double value);

nlohmann::json to_json(const CostCoefficients& coeffs);
nlohmann::json to_json(const WeavingConfiguration& cfg, const EquilibriumResult& result);
nlohmann::json to_json(const CalibrationResult& result);
nlohmann::json to_json(const ValidationReport& report);
nlohmann::json to_json(const FluctuationReport& report);

std::string format_solution(const WeavingConfiguration& cfg, const EquilibriumResult& result);
std::string format_report(const ValidationReport& report);
std::string format_report(const FluctuationReport& report);
void write_validation_csv(std::ostream& out, const ValidationReport& report);

}  // namespace weave::io
