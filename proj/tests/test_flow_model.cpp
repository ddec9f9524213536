#include <gtest/gtest.h>

#include <random>

#include "weave/error.hpp"
#include "weave/flow_model.hpp"

namespace weave {
namespace {

WeavingConfiguration at(double ne, double nx, double n2, const CostCoefficients& c) {
  return WeavingConfiguration(FlowConfiguration::make(ne, nx, n2), c);
}

CostCoefficients ones() { return CostCoefficients{}; }

TEST(NormalizeFlows, EqualSplit) {
  const auto n = normalize_flows({200, 200, 200, 800});
  EXPECT_DOUBLE_EQ(n.n_enter(), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(n.n_exit(), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(n.n2(), 1.0 / 3.0);
}

TEST(NormalizeFlows, NeighborBudgetSplit) {
  const auto n = normalize_flows({100, 250, 250, 800});
  EXPECT_NEAR(n.n_enter(), 0.1667, 5e-5);
  EXPECT_NEAR(n.n_exit(), 0.4167, 5e-5);
  EXPECT_NEAR(n.n2(), 0.4167, 5e-5);
  EXPECT_NEAR(n.n_enter() + n.n_exit() + n.n2(), 1.0, kSimplexTolerance);
}

TEST(NormalizeFlows, ZeroEntering) {
  const auto n = normalize_flows({0, 300, 300, 800});
  EXPECT_EQ(n.n_enter(), 0.0);
  EXPECT_DOUBLE_EQ(n.n_exit(), 0.5);
  EXPECT_DOUBLE_EQ(n.n2(), 0.5);
}

TEST(NormalizeFlows, ZeroNeighborFlowIsRejected) {
  try {
    normalize_flows({0, 0, 0, 800});
    FAIL() << "expected ZeroNeighborFlow";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroNeighborFlow);
  }
}

TEST(NormalizeFlows, RejectsNegativeOrMissingLaneOneFlow) {
  EXPECT_THROW(normalize_flows({-1, 300, 300, 800}), Error);
  EXPECT_THROW(normalize_flows({100, 300, 300, 0}), Error);
}

TEST(FlowConfiguration, RenormalizesSmallDrift) {
  const auto n = FlowConfiguration::make(0.5 + 4e-10, 0.25, 0.25);
  EXPECT_NEAR(n.n_enter() + n.n_exit() + n.n2(), 1.0, kSimplexTolerance);
}

TEST(FlowConfiguration, RejectsLargeDriftAndNegatives) {
  EXPECT_THROW(FlowConfiguration::make(0.5 + 1e-8, 0.25, 0.25), Error);
  EXPECT_THROW(FlowConfiguration::make(1.1, -0.1, 0.0), Error);
  EXPECT_THROW(FlowConfiguration::make(std::nan(""), 0.5, 0.5), Error);
}

TEST(FlowDistribution, SimplexInvariant) {
  const auto x = FlowDistribution::from_steadfast(0.3);
  EXPECT_EQ(x.x1_s() + x.x1_b(), 1.0);
  EXPECT_THROW(FlowDistribution::from_steadfast(1.5), Error);
  EXPECT_THROW(FlowDistribution::make(0.6, 0.6), Error);
}

TEST(CostCoefficients, ValidationNamesOffendingValue) {
  auto c = baseline_coefficients();
  c.gamma = 0.0;
  try {
    c.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidCoefficient);
    EXPECT_NE(std::string(e.what()).find("gamma"), std::string::npos);
  }
  EXPECT_THROW(WeavingConfiguration(FlowConfiguration::make(1, 0, 0), c), Error);
}

TEST(CostSteadfast, BaselineAtEqualSplit) {
  // alpha + beta/3 + 1/3 + omega/3 + 1/3 with unit costs 1.
  const auto cfg = at(1.0 / 3, 1.0 / 3, 1.0 / 3, baseline_coefficients());
  EXPECT_NEAR(cost_steadfast(cfg, FlowDistribution::from_steadfast(1.0)), 2.634333, 1e-6);
}

TEST(CostSteadfast, SingleTraversingTerm) {
  const auto cfg = at(0, 0, 1, ones());
  EXPECT_DOUBLE_EQ(cost_steadfast(cfg, FlowDistribution::from_steadfast(1.0)), 1.0);
}

TEST(CostSteadfast, MergingTermVanishesWithoutSteadfastVehicles) {
  auto c = ones();
  const auto x = FlowDistribution::from_steadfast(0.0);
  const auto base = cost_steadfast(at(0.3, 0.3, 0.4, c), x);
  c.c1_m = 1e6;
  EXPECT_DOUBLE_EQ(cost_steadfast(at(0.3, 0.3, 0.4, c), x), base);
}

TEST(CostBypass, BaselineWithNobodyBypassing) {
  const auto cfg = at(1.0 / 3, 1.0 / 3, 1.0 / 3, baseline_coefficients());
  EXPECT_NEAR(cost_bypass(cfg, FlowDistribution::from_bypass(0.0)), 0.333333, 1e-6);
}

TEST(CostBypass, AllBypassingWithLaneTwoOnly) {
  const auto cfg = at(0, 0, 1, ones());
  EXPECT_DOUBLE_EQ(cost_bypass(cfg, FlowDistribution::from_bypass(1.0)), 3.0);
}

TEST(CostBypass, ZeroWithoutBypassOrLaneTwoFlow) {
  const auto cfg = at(0.5, 0.5, 0, baseline_coefficients());
  EXPECT_EQ(cost_bypass(cfg, FlowDistribution::from_bypass(0.0)), 0.0);
}

class CostProperties : public ::testing::Test {
 protected:
  std::mt19937_64 rng{7};

  CostCoefficients random_coeffs() {
    std::uniform_real_distribution<double> lg(std::log(0.1), std::log(10.0));
    auto v = CostCoefficients{}.as_array();
    for (double& x : v) x = std::exp(lg(rng));
    return CostCoefficients::from_array(v);
  }
  FlowConfiguration random_flows() {
    std::exponential_distribution<double> e(1.0);
    const double a = e(rng), b = e(rng), c = e(rng);
    const double s = a + b + c;
    return FlowConfiguration::make(a / s, b / s, c / s);
  }
};

TEST_F(CostProperties, AffineInBypassShareWithSignedSlopes) {
  for (int i = 0; i < 500; ++i) {
    const WeavingConfiguration cfg(random_flows(), random_coeffs());
    const auto x0 = FlowDistribution::from_bypass(0.0);
    const auto xh = FlowDistribution::from_bypass(0.5);
    const auto x1 = FlowDistribution::from_bypass(1.0);
    const double s0 = cost_steadfast(cfg, x0), sh = cost_steadfast(cfg, xh), s1 = cost_steadfast(cfg, x1);
    const double b0 = cost_bypass(cfg, x0), bh = cost_bypass(cfg, xh), b1 = cost_bypass(cfg, x1);
    EXPECT_NEAR(sh, 0.5 * (s0 + s1), 1e-12 * std::max(1.0, s0));
    EXPECT_NEAR(bh, 0.5 * (b0 + b1), 1e-12 * std::max(1.0, b1));
    EXPECT_NEAR(s1 - s0, -steadfast_slope_magnitude(cfg), 1e-12 * std::max(1.0, s0));
    EXPECT_NEAR(b1 - b0, bypass_slope(cfg), 1e-12 * std::max(1.0, b1));
    EXPECT_GT(steadfast_slope_magnitude(cfg), 0.0);
    EXPECT_GE(bypass_slope(cfg), cfg.coeffs().c2_t * cfg.coeffs().gamma);
    EXPECT_GE(s1, 0.0);
    EXPECT_GE(b0, 0.0);
  }
}

TEST_F(CostProperties, HomogeneousInUnitCosts) {
  for (int i = 0; i < 500; ++i) {
    const auto flows = random_flows();
    const auto c = random_coeffs();
    const double k = std::exp(std::uniform_real_distribution<double>(-5, 5)(rng));
    const WeavingConfiguration a(flows, c), b(flows, c.scaled_unit_costs(k));
    const auto x = FlowDistribution::from_bypass(std::uniform_real_distribution<double>(0, 1)(rng));
    EXPECT_NEAR(cost_steadfast(b, x), k * cost_steadfast(a, x), 1e-12 * k * cost_steadfast(a, x));
    EXPECT_NEAR(cost_bypass(b, x), k * cost_bypass(a, x), 1e-12 * k * (1 + cost_bypass(a, x)));
  }
}

TEST_F(CostProperties, MonotoneInConflictingFlows) {
  for (int i = 0; i < 500; ++i) {
    const auto c = random_coeffs();
    const auto x = FlowDistribution::from_bypass(std::uniform_real_distribution<double>(0, 1)(rng));
    const auto n = random_flows();
    const double d = 0.5 * n.n2();
    // Move mass from n2 into n_enter or n_exit.
    const WeavingConfiguration base(n, c);
    const WeavingConfiguration more_enter(
        FlowConfiguration::make(n.n_enter() + d, n.n_exit(), n.n2() - d), c);
    const WeavingConfiguration more_exit(
        FlowConfiguration::make(n.n_enter(), n.n_exit() + d, n.n2() - d), c);
    EXPECT_GE(cost_steadfast(more_enter, x), cost_steadfast(base, x) - 1e-12);
    EXPECT_GE(cost_steadfast(more_exit, x), cost_steadfast(base, x) - 1e-12);
    // Move mass from n_enter into n2 or n_exit.
    const double e = 0.5 * n.n_enter();
    const WeavingConfiguration more_n2(
        FlowConfiguration::make(n.n_enter() - e, n.n_exit(), n.n2() + e), c);
    const WeavingConfiguration more_exit2(
        FlowConfiguration::make(n.n_enter() - e, n.n_exit() + e, n.n2()), c);
    EXPECT_GE(cost_bypass(more_n2, x), cost_bypass(base, x) - 1e-12);
    EXPECT_GE(cost_bypass(more_exit2, x), cost_bypass(base, x) - 1e-12);
  }
}

}  // namespace
}  // namespace weave
