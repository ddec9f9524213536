#include "weave/error.hpp"

namespace weave {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroNeighborFlow: return "ZeroNeighborFlow";
    case ErrorCode::InvalidSimplex: return "InvalidSimplex";
    case ErrorCode::InvalidCoefficient: return "InvalidCoefficient";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ZeroObserved: return "ZeroObserved";
    case ErrorCode::NoThroughVehicles: return "NoThroughVehicles";
    case ErrorCode::MissingHeader: return "MissingHeader";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

namespace {
std::string located(const std::string& source, std::size_t line, const std::string& detail) {
  if (line == 0) return source + ": " + detail;
  return source + ":" + std::to_string(line) + ": " + detail;
}
}  // namespace

ParseError::ParseError(std::string source, std::size_t line, const std::string& detail)
    : Error(ErrorCode::ParseError, located(source, line, detail)),
      source_(std::move(source)),
      line_(line) {}

}  // namespace weave
