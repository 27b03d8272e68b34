#include "activegp/error.hpp"

namespace activegp {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::MeanInconsistent: return "MeanInconsistent";
    case ErrorCode::DuplicatePoint: return "DuplicatePoint";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::UnknownParameter: return "UnknownParameter";
    case ErrorCode::RankDeficientDesign: return "RankDeficientDesign";
    case ErrorCode::OptimizationFailed: return "OptimizationFailed";
    case ErrorCode::SingularInformation: return "SingularInformation";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::FoldFitFailed: return "FoldFitFailed";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace activegp
