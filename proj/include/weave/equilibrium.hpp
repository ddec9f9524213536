#pragma once

#include "weave/flow_model.hpp"

namespace weave {

enum class EquilibriumCase { AllBypass, Interior, AllSteadfast };

const char* to_string(EquilibriumCase c);

// Default tolerance on the complementarity residual.
inline constexpr double kResidualTolerance = 1e-9;

struct EquilibriumResult {
  FlowDistribution distribution;
  EquilibriumCase regime;
  // J1_s - J1_b at the returned distribution.
  double cost_gap_at_solution;
};

// Unique lane-choice equilibrium. Both costs are affine in x1_b, so the
// crossing point is intercept_gap / combined_slope, clamped onto [0, 1].
EquilibriumResult solve_equilibrium(const WeavingConfiguration& cfg);

// Hinge form of the complementarity conditions:
//   max(0, x1_s (J1_s - J1_b)) + max(0, x1_b (J1_b - J1_s)).
// Zero exactly on the equilibrium set.
double equilibrium_residual(const WeavingConfiguration& cfg, const FlowDistribution& x) noexcept;

bool is_equilibrium(const WeavingConfiguration& cfg, const FlowDistribution& x,
                    double tolerance = kResidualTolerance) noexcept;

}  // namespace weave
