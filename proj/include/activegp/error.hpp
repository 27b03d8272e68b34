#pragma once

#include <stdexcept>
#include <string>

namespace activegp {

enum class ErrorCode {
  DimensionMismatch,
  NonFiniteValue,
  MeanInconsistent,
  DuplicatePoint,
  OutOfBounds,
  InvalidArgument,
  NotPositiveDefinite,
  UnknownParameter,
  RankDeficientDesign,
  OptimizationFailed,
  SingularInformation,
  EmptyPool,
  FoldFitFailed,
  ConfigError,
};

[[nodiscard]] const char* to_string(ErrorCode code) noexcept;

/// Every recoverable failure in the library is reported as an Error carrying a code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace activegp
