#pragma once

#include <string>
#include <vector>

#include "weave/flow_model.hpp"

namespace weave {

// One observed lane-choice outcome.
struct DataPoint {
  FlowConfiguration flows;
  FlowDistribution observed;
  double weight = 1.0;
  std::string scenario_id;
};

using Dataset = std::vector<DataPoint>;

// Throws Error(InvalidArgument) if a weight is negative or not finite.
void validate_dataset(const Dataset& data);

}  // namespace weave
