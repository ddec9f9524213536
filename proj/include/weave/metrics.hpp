#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "weave/dataset.hpp"
#include "weave/flow_model.hpp"

namespace weave {

struct MperResult {
  // Mean absolute relative error on x1_s, in percent.
  double percent = 0.0;
  std::size_t used = 0;
  // Points whose observed x1_s is exactly 0 are left out of the mean.
  std::size_t excluded_zero_observed = 0;
};

// Throws LengthMismatch on unequal or empty inputs and ZeroObserved when no
// point has a non-zero observation.
MperResult mper(std::span<const double> predicted, std::span<const double> observed,
                std::optional<std::span<const double>> weights = std::nullopt);

struct PointError {
  DataPoint point;
  FlowDistribution predicted;
  double abs_error;
  // NaN when observed x1_s == 0.
  double rel_error;
};

struct ValidationReport {
  std::vector<PointError> points;
  double mper = 0.0;
  std::map<std::string, double> grouped_mper;
  std::size_t n_points = 0;
  std::size_t excluded_zero_observed = 0;
  std::optional<std::string> group_by;
};

enum class GroupKey { ScenarioId, NEnter, NExit, N2 };
std::optional<GroupKey> parse_group_key(std::string_view text);
const char* to_string(GroupKey key);

// Predicts every point with the equilibrium solver and aggregates MPER,
// overall and per group. Numeric group labels use 4 decimals.
ValidationReport validate(const CostCoefficients& coeffs, const Dataset& data,
                          std::optional<GroupKey> group_by = std::nullopt);

inline constexpr double kSignificantFr = 25.0;

struct FluctuationReport {
  CostCoefficients baseline;
  CostCoefficients variant;
  // Parameter name -> percent change relative to the baseline.
  std::map<std::string, double> fr;
  std::set<std::string> significant;
  double threshold = kSignificantFr;
};

// FR(p) = (variant - baseline) / baseline * 100 for each weight, plus the
// four unit costs when requested.
FluctuationReport fluctuating_rate(const CostCoefficients& baseline,
                                   const CostCoefficients& variant,
                                   double threshold = kSignificantFr,
                                   bool include_unit_costs = false);

// Neumaier-compensated sum, independent of how the terms were produced.
double compensated_sum(std::span<const double> values) noexcept;

}  // namespace weave
