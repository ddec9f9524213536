#include "weave/dataset.hpp"

#include <cmath>
#include <string>

#include "weave/error.hpp"

namespace weave {

void validate_dataset(const Dataset& data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double w = data[i].weight;
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::InvalidArgument,
                  "data point " + std::to_string(i) + " has invalid weight " + std::to_string(w));
    }
  }
}

}  // namespace weave
