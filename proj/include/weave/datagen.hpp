#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "weave/dataset.hpp"
#include "weave/flow_model.hpp"

namespace weave {

enum class FlowClass { Enter, Exit, Lane2, None };

const char* to_string(FlowClass c);
// Accepts enter, exit, lane2 (or n2), none; case-insensitive.
std::optional<FlowClass> parse_flow_class(std::string_view text);

// Enumeration of flow configurations on the simplex. With a fixed class the
// grid is a line: that ratio is held at fixed_value and the first remaining
// class (in enter, exit, n2 order) steps by grid_step, the last one takes
// the remainder. Without a fixed class the full triangular lattice is
// produced. Free components outside [free_min, free_max] are dropped.
struct ScenarioGrid {
  double total_flow = 1400.0;
  double neighbor_budget = 600.0;
  double f1 = 800.0;
  FlowClass fixed_class = FlowClass::None;
  double fixed_value = 0.0;
  double grid_step = 1.0 / 24.0;
  double free_min = 0.0;
  double free_max = 1.0;

  void validate() const;
};

// Sorted lexicographically by (n_enter, n_exit, n2), duplicate-free.
// Throws Error(EmptyGrid) if nothing survives.
std::vector<FlowConfiguration> generate_grid(const ScenarioGrid& grid);

// Union of several grids, deduplicated and sorted.
std::vector<FlowConfiguration> generate_grids(const std::vector<ScenarioGrid>& grids);

// Each of the three classes held in turn at 100, 200, 250 and 400 veh/h of
// the 600 veh/h neighbor budget while the other two move in 10 veh/h steps:
// 415 distinct configurations.
std::vector<ScenarioGrid> calibration_grids();

// x1_s = clamp(equilibrium x1_s + N(0, sigma), 0, 1). Each config draws from
// its own random stream derived from (seed, config index).
Dataset synthesize_equilibrium_noise(const std::vector<FlowConfiguration>& configs,
                                     const CostCoefficients& hidden, double sigma,
                                     int samples_per_config, std::uint64_t seed);

inline constexpr double kLogitDamping = 0.5;
inline constexpr double kLogitConvergenceTolerance = 1e-6;

struct LogitResult {
  Dataset data;
  // Configs whose damped iteration had not settled after the budget.
  std::vector<std::size_t> nonconverged;
  std::vector<std::string> warnings;
};

// Logit fixed point of x1_b = logistic(sensitivity * (J1_s(x) - J1_b(x))),
// followed by binomial sampling of `population` vehicles.
double logit_fixed_point(const WeavingConfiguration& cfg, double sensitivity, int iterations,
                         bool* converged = nullptr);

LogitResult synthesize_logit(const std::vector<FlowConfiguration>& configs,
                             const CostCoefficients& hidden, double sensitivity,
                             std::int64_t population, int iterations, std::uint64_t seed);

enum class VehicleClass { Through1, Through2, Enter, Exit };
enum class Decision { Steadfast, Bypass, NA };

struct VehicleRecord {
  std::int64_t timestep = 0;
  std::string vehicle_id;
  VehicleClass vclass = VehicleClass::Through1;
  Decision decision = Decision::NA;
};

struct IngestOptions {
  std::int64_t warmup_steps = 5000;
  std::int64_t window_steps = 15000;
};

struct IngestResult {
  Dataset data;
  std::vector<std::string> warnings;
  std::size_t records_read = 0;
  std::size_t records_in_window = 0;
};

// Streams a vehicle log. Layout:
//   timestep,vehicle_id,vclass,decision
//   #scenario,<id>,<n_enter>,<n_exit>,<n2>
//   <records...>
//   #scenario,...
// Records outside [warmup, warmup + window) are ignored and each vehicle is
// counted at its first decision only. Scenarios without a Through1 decision
// in the window are skipped with a warning; if none remain the call throws
// Error(NoThroughVehicles).
IngestResult ingest_vehicle_log(std::istream& in, const IngestOptions& opts = {},
                                const std::string& source = "<stream>");
IngestResult ingest_vehicle_log(const std::filesystem::path& path, const IngestOptions& opts = {});

}  // namespace weave
