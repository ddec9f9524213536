#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "weave/dataset.hpp"
#include "weave/flow_model.hpp"

namespace weave {

inline constexpr std::uint64_t kDefaultSeed = 12345;

struct CalibrationOptions {
  // Pin C1t = C2t = C1m = C2m = 1. When false, only C1t is pinned and the
  // other three unit costs are searched in the unit-cost box.
  bool fixed_unit_costs = true;
  double weight_lower_bound = 1.0;
  double weight_upper_bound = 20.0;
  double unit_cost_lower_bound = 0.05;
  double unit_cost_upper_bound = 20.0;
  int restarts = 16;
  int max_iterations = 2000;
  double tolerance = 1e-8;
  std::uint64_t seed = kDefaultSeed;

  void validate() const;
};

struct CalibrationResult {
  CostCoefficients coeffs;
  // Weighted mean squared error of predicted vs observed x1_s.
  double objective = 0.0;
  std::vector<double> per_restart_objectives;
  int iterations_used = 0;
  // Set when every observation sits at the same simplex boundary; the fit
  // then only has to satisfy an inequality and is weakly determined.
  bool degenerate = false;
  std::vector<std::string> warnings;
};

FlowDistribution predict(const CostCoefficients& coeffs, const FlowConfiguration& flows);

// Weighted MSE on x1_s of the equilibrium predictions under `coeffs`.
double calibration_objective(const CostCoefficients& coeffs, const Dataset& data);

// Multi-start bounded Nelder-Mead over the weights (and, optionally, three
// of the unit costs). Deterministic for fixed (data, opts).
CalibrationResult calibrate(const Dataset& data, const CalibrationOptions& opts = {});

}  // namespace weave
