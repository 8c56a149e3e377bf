#include "adrc/errors.hpp"

namespace adrc {

std::string_view ErrorName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kConjugateViolation: return "ConjugateViolation";
    case ErrorCode::kDegenerate: return "Degenerate";
    case ErrorCode::kInfeasibleSplit: return "InfeasibleSplit";
    case ErrorCode::kNoRelativeDegree: return "NoRelativeDegree";
    case ErrorCode::kUnobservable: return "Unobservable";
    case ErrorCode::kRelativeDegreeMismatch: return "RelativeDegreeMismatch";
    case ErrorCode::kSingularMap: return "SingularMap";
    case ErrorCode::kNotHurwitz: return "NotHurwitz";
    case ErrorCode::kUnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::kUnstableBlowup: return "UnstableBlowup";
    case ErrorCode::kConfig: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace adrc
