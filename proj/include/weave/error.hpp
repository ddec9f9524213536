#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace weave {

enum class ErrorCode {
  InvalidArgument,
  ZeroNeighborFlow,
  InvalidSimplex,
  InvalidCoefficient,
  EmptyDataset,
  EmptyGrid,
  LengthMismatch,
  ZeroObserved,
  NoThroughVehicles,
  MissingHeader,
  ParseError,
  IoError,
};

const char* to_string(ErrorCode code);

// All domain failures raised by the library carry a code so the CLI can map
// them onto exit statuses without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Input-format failure. line() is 1-based, 0 when no line applies.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& detail);
  std::size_t line() const noexcept { return line_; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::string source_;
  std::size_t line_;
};

}  // namespace weave
