#include <gtest/gtest.h>

#include "experiments.hpp"
#include "oracles.hpp"
#include "weave/calibration.hpp"
#include "weave/datagen.hpp"
#include "weave/equilibrium.hpp"
#include "weave/error.hpp"
#include "weave/metrics.hpp"

namespace weave {
namespace {

oracle::Weights weights_of(const CostCoefficients& c) {
  return {c.c1_t, c.c2_t, c.c1_m, c.c2_m, c.alpha, c.beta, c.omega, c.gamma, c.rho, c.delta};
}

TEST(Predict, BaselineEqualSplit) {
  const double third = 1.0 / 3.0;
  const auto x = predict(baseline_coefficients(), FlowConfiguration::make(third, third, third));
  EXPECT_NEAR(x.x1_b(), 0.40580, 1e-5);
}

TEST(Predict, BaselineLaneTwoOnly) {
  // (alpha - 1) / (gamma + rho + alpha) = 0.255 / 4.639
  const auto c = baseline_coefficients();
  const double expected = oracle::grid_search_bypass(weights_of(c), 0, 0, 1, 1e-6);
  EXPECT_NEAR(expected, 0.0550, 5e-5);
  EXPECT_NEAR(predict(c, FlowConfiguration::make(0, 0, 1)).x1_b(), expected, 1e-6);
}

TEST(Predict, MatchesSolver) {
  const auto c = baseline_coefficients();
  for (const auto& n : generate_grid(ScenarioGrid{})) {
    EXPECT_EQ(predict(c, n), solve_equilibrium(WeavingConfiguration(n, c)).distribution);
  }
}

class CalibrateNoiseFree : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data_ = new Dataset(synthesize_equilibrium_noise(generate_grids(calibration_grids()),
                                                     baseline_coefficients(), 0.0, 1, 1));
    result_ = new CalibrationResult(calibrate(*data_));
  }
  static void TearDownTestSuite() {
    delete data_;
    delete result_;
  }
  static Dataset* data_;
  static CalibrationResult* result_;
};
Dataset* CalibrateNoiseFree::data_ = nullptr;
CalibrationResult* CalibrateNoiseFree::result_ = nullptr;

TEST_F(CalibrateNoiseFree, RecoversPredictions) {
  ASSERT_EQ(data_->size(), 415u);
  EXPECT_LE(validate(result_->coeffs, *data_).mper, 0.5);
  EXPECT_LT(result_->objective, 1e-10);
}

TEST_F(CalibrateNoiseFree, RespectsBoxAndFixedUnitCosts) {
  const auto& c = result_->coeffs;
  EXPECT_EQ(c.c1_t, 1.0);
  EXPECT_EQ(c.c2_t, 1.0);
  EXPECT_EQ(c.c1_m, 1.0);
  EXPECT_EQ(c.c2_m, 1.0);
  const auto v = c.as_array();
  for (std::size_t i = CostCoefficients::kFirstWeight; i < CostCoefficients::kCount; ++i) {
    EXPECT_GE(v[i], 1.0);
    EXPECT_LE(v[i], 20.0);
  }
}

TEST_F(CalibrateNoiseFree, ReturnsBestRestart) {
  ASSERT_EQ(result_->per_restart_objectives.size(), 16u);
  for (double r : result_->per_restart_objectives) EXPECT_LE(result_->objective, r);
  EXPECT_DOUBLE_EQ(result_->objective, calibration_objective(result_->coeffs, *data_));
}

TEST_F(CalibrateNoiseFree, OmegaAndRhoSitAtTheLowerBound) {
  EXPECT_LE(std::fabs(result_->coeffs.omega - 1.0), 0.05);
  EXPECT_LE(std::fabs(result_->coeffs.rho - 1.0), 0.05);
}

TEST_F(CalibrateNoiseFree, IsBitwiseDeterministic) {
  const auto again = calibrate(*data_);
  EXPECT_EQ(again.coeffs, result_->coeffs);
  EXPECT_EQ(again.objective, result_->objective);
  EXPECT_EQ(again.per_restart_objectives, result_->per_restart_objectives);
  EXPECT_EQ(again.iterations_used, result_->iterations_used);
}

TEST(Calibrate, SingleSteadfastPointIsFitExactly) {
  // x1_b = 0 at n = (0, 0, 1) needs alpha at its lower bound of 1.
  Dataset data{{FlowConfiguration::make(0, 0, 1), FlowDistribution::from_bypass(0.0), 1.0, "a"}};
  CalibrationOptions opts;
  opts.restarts = 4;
  const auto r = calibrate(data, opts);
  EXPECT_EQ(r.objective, 0.0);
  const WeavingConfiguration cfg(data[0].flows, r.coeffs);
  const auto x = FlowDistribution::from_bypass(0.0);
  EXPECT_GE(cost_bypass(cfg, x), cost_steadfast(cfg, x));
  EXPECT_TRUE(r.degenerate);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Calibrate, SingleSteadfastPointWithLooseBounds) {
  Dataset data{{FlowConfiguration::make(0.05, 0.05, 0.9), FlowDistribution::from_bypass(0.0), 1.0, ""}};
  CalibrationOptions opts;
  opts.weight_lower_bound = 0.1;
  opts.restarts = 4;
  const auto r = calibrate(data, opts);
  EXPECT_EQ(r.objective, 0.0);
  EXPECT_EQ(predict(r.coeffs, data[0].flows).x1_b(), 0.0);
}

TEST(Calibrate, NoisyObservationsGeneralize) {
  const auto [train_cfg, test_cfg] = experiments::split_grid(200, 100);
  const auto hidden = baseline_coefficients();
  const auto train = synthesize_equilibrium_noise(train_cfg, hidden, 0.02, 1, experiments::kNoiseSeed);
  const auto test = synthesize_equilibrium_noise(test_cfg, hidden, 0.02, 1, experiments::kNoiseSeed + 1);
  const auto r = calibrate(train);
  EXPECT_LE(validate(r.coeffs, test).mper, 5.0);
}

TEST(Calibrate, FreeUnitCostsPinNumeraire) {
  const auto data = synthesize_equilibrium_noise(generate_grid(ScenarioGrid{}), baseline_coefficients(),
                                                 0.0, 1, 3);
  CalibrationOptions opts;
  opts.fixed_unit_costs = false;
  opts.restarts = 4;
  const auto r = calibrate(data, opts);
  EXPECT_EQ(r.coeffs.c1_t, 1.0);
  for (double u : {r.coeffs.c2_t, r.coeffs.c1_m, r.coeffs.c2_m}) {
    EXPECT_GE(u, opts.unit_cost_lower_bound);
    EXPECT_LE(u, opts.unit_cost_upper_bound);
  }
  EXPECT_LE(validate(r.coeffs, data).mper, 0.5);
}

TEST(Calibrate, RejectsEmptyDataAndBadOptions) {
  try {
    calibrate({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyDataset);
  }
  Dataset one{{FlowConfiguration::make(0.2, 0.3, 0.5), FlowDistribution::from_bypass(0.3), 1.0, ""}};
  CalibrationOptions bad;
  bad.weight_lower_bound = 5;
  bad.weight_upper_bound = 2;
  EXPECT_THROW(calibrate(one, bad), Error);
  bad = {};
  bad.restarts = 0;
  EXPECT_THROW(calibrate(one, bad), Error);
  one[0].weight = 0.0;
  EXPECT_THROW(calibrate(one), Error);
}

TEST(CalibrationObjective, IsWeightedMeanSquaredError) {
  const auto c = baseline_coefficients();
  const auto n = FlowConfiguration::make(0.2, 0.3, 0.5);
  const double xs = predict(c, n).x1_s();
  Dataset data{{n, FlowDistribution::from_steadfast(xs - 0.1), 1.0, ""},
               {n, FlowDistribution::from_steadfast(xs + 0.2), 3.0, ""}};
  EXPECT_NEAR(calibration_objective(c, data), (0.01 + 3 * 0.04) / 4.0, 1e-12);
}

}  // namespace
}  // namespace weave
