#include "weave/flow_model.hpp"

#include <cmath>
#include <string>

#include "weave/error.hpp"

namespace weave {

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

// Shared by both simplex types: check components, then rescale to a unit sum.
template <std::size_t N>
std::array<double, N> renormalize(std::array<double, N> v, double tolerance, const char* what) {
  double sum = 0.0;
  for (double c : v) {
    if (!finite_nonneg(c)) {
      throw Error(ErrorCode::InvalidSimplex,
                  std::string(what) + " component " + std::to_string(c) + " is not in [0, 1]");
    }
    sum += c;
  }
  if (!(std::fabs(sum - 1.0) <= tolerance)) {
    throw Error(ErrorCode::InvalidSimplex,
                std::string(what) + " components sum to " + std::to_string(sum) + ", not 1");
  }
  if (std::fabs(sum - 1.0) > kSimplexTolerance) {
    for (double& c : v) c /= sum;
  }
  for (double c : v) {
    if (c > 1.0) {
      throw Error(ErrorCode::InvalidSimplex, std::string(what) + " component exceeds 1");
    }
  }
  return v;
}

}  // namespace

void FlowRates::validate() const {
  if (!finite_nonneg(f_enter) || !finite_nonneg(f_exit) || !finite_nonneg(f2)) {
    throw Error(ErrorCode::InvalidArgument, "neighbor flows must be finite and non-negative");
  }
  if (!std::isfinite(f1) || f1 <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "lane 1 through flow f1 must be positive");
  }
}

FlowConfiguration FlowConfiguration::make(double n_enter, double n_exit, double n2,
                                          double tolerance) {
  auto v = renormalize<3>({n_enter, n_exit, n2}, tolerance, "flow configuration");
  return FlowConfiguration(v[0], v[1], v[2]);
}

FlowDistribution FlowDistribution::make(double x1_s, double x1_b, double tolerance) {
  auto v = renormalize<2>({x1_s, x1_b}, tolerance, "flow distribution");
  return FlowDistribution(v[0], v[1]);
}

FlowDistribution FlowDistribution::from_steadfast(double x1_s) {
  if (!std::isfinite(x1_s) || x1_s < 0.0 || x1_s > 1.0) {
    throw Error(ErrorCode::InvalidSimplex, "steadfast share must lie in [0, 1]");
  }
  return FlowDistribution(x1_s, 1.0 - x1_s);
}

FlowDistribution FlowDistribution::from_bypass(double x1_b) {
  if (!std::isfinite(x1_b) || x1_b < 0.0 || x1_b > 1.0) {
    throw Error(ErrorCode::InvalidSimplex, "bypass share must lie in [0, 1]");
  }
  return FlowDistribution(1.0 - x1_b, x1_b);
}

std::array<double, CostCoefficients::kCount> CostCoefficients::as_array() const noexcept {
  return {c1_t, c2_t, c1_m, c2_m, alpha, beta, omega, gamma, rho, delta};
}

CostCoefficients CostCoefficients::from_array(const std::array<double, kCount>& v) noexcept {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]};
}

void CostCoefficients::validate() const {
  const auto values = as_array();
  for (std::size_t i = 0; i < kCount; ++i) {
    if (!std::isfinite(values[i]) || values[i] <= 0.0) {
      throw Error(ErrorCode::InvalidCoefficient,
                  std::string(kNames[i]) + " = " + std::to_string(values[i]) +
                      " must be finite and > 0");
    }
  }
}

CostCoefficients CostCoefficients::scaled_unit_costs(double k) const noexcept {
  CostCoefficients out = *this;
  out.c1_t *= k;
  out.c2_t *= k;
  out.c1_m *= k;
  out.c2_m *= k;
  return out;
}

CostCoefficients baseline_coefficients() noexcept {
  CostCoefficients c;
  c.alpha = 1.255;
  c.beta = 1.138;
  c.omega = 1.000;
  c.gamma = 2.384;
  c.rho = 1.000;
  c.delta = 3.094;
  return c;
}

WeavingConfiguration::WeavingConfiguration(FlowConfiguration flows, CostCoefficients coeffs)
    : flows_(flows), coeffs_(coeffs) {
  coeffs_.validate();
}

FlowConfiguration normalize_flows(const FlowRates& f) {
  f.validate();
  const double total = f.f_enter + f.f_exit + f.f2;
  if (total == 0.0) {
    throw Error(ErrorCode::ZeroNeighborFlow, "f_enter + f_exit + f2 is zero");
  }
  return FlowConfiguration::make(f.f_enter / total, f.f_exit / total, f.f2 / total);
}

double cost_steadfast(const WeavingConfiguration& cfg, const FlowDistribution& x) noexcept {
  const auto& c = cfg.coeffs();
  const auto& n = cfg.flows();
  const double xs = x.x1_s();
  return c.c1_t * (c.alpha * xs + c.beta * n.n_exit() + n.n_enter()) +
         c.c1_m * (c.omega * xs * n.n_exit() + xs * n.n_enter());
}

double cost_bypass(const WeavingConfiguration& cfg, const FlowDistribution& x) noexcept {
  const auto& c = cfg.coeffs();
  const auto& n = cfg.flows();
  const double xb = x.x1_b();
  return c.c2_t * (c.gamma * xb + n.n2()) +
         c.c2_m * (c.rho * xb * n.n2() + c.delta * xb * n.n_exit());
}

double steadfast_slope_magnitude(const WeavingConfiguration& cfg) noexcept {
  const auto& c = cfg.coeffs();
  const auto& n = cfg.flows();
  return c.c1_t * c.alpha + c.c1_m * (c.omega * n.n_exit() + n.n_enter());
}

double bypass_slope(const WeavingConfiguration& cfg) noexcept {
  const auto& c = cfg.coeffs();
  const auto& n = cfg.flows();
  return c.c2_t * c.gamma + c.c2_m * (c.rho * n.n2() + c.delta * n.n_exit());
}

}  // namespace weave
