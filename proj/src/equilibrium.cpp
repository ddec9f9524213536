#include "weave/equilibrium.hpp"

#include <algorithm>
#include <cmath>

#include "weave/error.hpp"

namespace weave {

const char* to_string(EquilibriumCase c) {
  switch (c) {
    case EquilibriumCase::AllBypass: return "AllBypass";
    case EquilibriumCase::Interior: return "Interior";
    case EquilibriumCase::AllSteadfast: return "AllSteadfast";
  }
  return "Unknown";
}

EquilibriumResult solve_equilibrium(const WeavingConfiguration& cfg) {
  const auto& c = cfg.coeffs();
  const auto& n = cfg.flows();

  // J1_s - J1_b at x1_b = 0, and the rate at which that gap closes as x1_b
  // grows.
  const double intercept_gap = c.c1_t * (c.alpha + c.beta * n.n_exit() + n.n_enter()) +
                               c.c1_m * (c.omega * n.n_exit() + n.n_enter()) - c.c2_t * n.n2();
  const double combined_slope = bypass_slope(cfg) + steadfast_slope_magnitude(cfg);
  if (!(combined_slope > 0.0) || !std::isfinite(intercept_gap)) {
    throw Error(ErrorCode::InvalidCoefficient, "cost slopes are degenerate");
  }

  const double ratio = intercept_gap / combined_slope;
  if (ratio <= 0.0) {
    // Steadfast is never costlier: everybody stays.
    const auto x = FlowDistribution::from_bypass(0.0);
    return {x, EquilibriumCase::AllSteadfast, ratio == 0.0 ? 0.0 : intercept_gap};
  }
  if (ratio >= 1.0) {
    const auto x = FlowDistribution::from_bypass(1.0);
    return {x, EquilibriumCase::AllBypass, ratio == 1.0 ? 0.0 : intercept_gap - combined_slope};
  }
  const auto x = FlowDistribution::from_bypass(ratio);
  return {x, EquilibriumCase::Interior, cost_steadfast(cfg, x) - cost_bypass(cfg, x)};
}

double equilibrium_residual(const WeavingConfiguration& cfg, const FlowDistribution& x) noexcept {
  const double gap = cost_steadfast(cfg, x) - cost_bypass(cfg, x);
  return std::max(0.0, x.x1_s() * gap) + std::max(0.0, x.x1_b() * -gap);
}

bool is_equilibrium(const WeavingConfiguration& cfg, const FlowDistribution& x,
                    double tolerance) noexcept {
  return equilibrium_residual(cfg, x) <= tolerance;
}

}  // namespace weave
