#pragma once

#include <array>
#include <string_view>

namespace weave {

// Tolerance on the unit sum of a constructed simplex vector.
inline constexpr double kSimplexTolerance = 1e-12;
// Inputs whose sum is off by at most this much are renormalized; worse
// deviations are rejected.
inline constexpr double kRenormalizeTolerance = 1e-9;

// Raw flows in veh/h around the weaving zone.
struct FlowRates {
  double f_enter = 0.0;
  double f_exit = 0.0;
  double f2 = 0.0;
  double f1 = 0.0;

  // Throws Error(InvalidArgument) unless all fields are finite and
  // non-negative with f1 > 0.
  void validate() const;
};

// Normalized neighbor flow ratios (n_enter, n_exit, n2) on the probability
// simplex.
class FlowConfiguration {
 public:
  // Validates and renormalizes. `tolerance` bounds how far the raw sum may
  // stray from 1 before the input is rejected with InvalidSimplex.
  static FlowConfiguration make(double n_enter, double n_exit, double n2,
                                double tolerance = kRenormalizeTolerance);

  double n_enter() const noexcept { return n_enter_; }
  double n_exit() const noexcept { return n_exit_; }
  double n2() const noexcept { return n2_; }
  std::array<double, 3> as_array() const noexcept { return {n_enter_, n_exit_, n2_}; }

  friend bool operator==(const FlowConfiguration&, const FlowConfiguration&) = default;

 private:
  FlowConfiguration(double ne, double nx, double n2) : n_enter_(ne), n_exit_(nx), n2_(n2) {}
  double n_enter_;
  double n_exit_;
  double n2_;
};

// Lane 1 through-vehicle split between staying (steadfast) and moving to
// Lane 2 (bypass).
class FlowDistribution {
 public:
  static FlowDistribution make(double x1_s, double x1_b,
                               double tolerance = kRenormalizeTolerance);
  // x1_b is set to exactly 1 - x1_s.
  static FlowDistribution from_steadfast(double x1_s);
  static FlowDistribution from_bypass(double x1_b);

  double x1_s() const noexcept { return x1_s_; }
  double x1_b() const noexcept { return x1_b_; }

  friend bool operator==(const FlowDistribution&, const FlowDistribution&) = default;

 private:
  FlowDistribution(double s, double b) : x1_s_(s), x1_b_(b) {}
  double x1_s_;
  double x1_b_;
};

// Unit costs per lane and the six dimensionless weights of the two cost
// functions.
struct CostCoefficients {
  double c1_t = 1.0;
  double c2_t = 1.0;
  double c1_m = 1.0;
  double c2_m = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  double omega = 1.0;
  double gamma = 1.0;
  double rho = 1.0;
  double delta = 1.0;

  static constexpr std::size_t kCount = 10;
  static constexpr std::array<std::string_view, kCount> kNames = {
      "c1_t", "c2_t", "c1_m", "c2_m", "alpha", "beta", "omega", "gamma", "rho", "delta"};
  // Indices into as_array() of the six weights.
  static constexpr std::size_t kFirstWeight = 4;

  std::array<double, kCount> as_array() const noexcept;
  static CostCoefficients from_array(const std::array<double, kCount>& values) noexcept;

  // Throws Error(InvalidCoefficient) naming the first value that is not
  // finite and strictly positive.
  void validate() const;

  // Returns this with all four unit costs multiplied by k.
  CostCoefficients scaled_unit_costs(double k) const noexcept;

  friend bool operator==(const CostCoefficients&, const CostCoefficients&) = default;
};

// Coefficients calibrated on a two-lane weaving ramp at 1400 veh/h total
// demand (600 veh/h neighbor budget): unit costs all 1, alpha 1.255,
// beta 1.138, omega 1.000, gamma 2.384, rho 1.000, delta 3.094.
CostCoefficients baseline_coefficients() noexcept;

// A flow configuration together with the cost model it is evaluated under.
class WeavingConfiguration {
 public:
  WeavingConfiguration(FlowConfiguration flows, CostCoefficients coeffs);

  const FlowConfiguration& flows() const noexcept { return flows_; }
  const CostCoefficients& coeffs() const noexcept { return coeffs_; }

 private:
  FlowConfiguration flows_;
  CostCoefficients coeffs_;
};

// Throws Error(ZeroNeighborFlow) when f_enter + f_exit + f2 == 0.
FlowConfiguration normalize_flows(const FlowRates& f);

// J1_s: cost to a Lane 1 through vehicle of staying in Lane 1.
double cost_steadfast(const WeavingConfiguration& cfg, const FlowDistribution& x) noexcept;

// J1_b: cost of shifting to Lane 2.
double cost_bypass(const WeavingConfiguration& cfg, const FlowDistribution& x) noexcept;

// Both costs are affine in x1_b. The steadfast cost falls with slope
// -steadfast_slope_magnitude(); the bypass cost rises with bypass_slope().
double steadfast_slope_magnitude(const WeavingConfiguration& cfg) noexcept;
double bypass_slope(const WeavingConfiguration& cfg) noexcept;

}  // namespace weave
