#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace calibkit {

enum class ErrorKind {
  DimensionMismatch,
  NotOnSimplex,
  BadLabel,
  ParseError,
  IoError,
  TooFewSamples,
  EmptyDataset,
  EmptyInput,
  DegenerateBandwidth,
  BadParameter,
  UnsupportedKernel,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for every library failure; `kind()` tells callers
/// which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace calibkit
