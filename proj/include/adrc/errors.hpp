#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace adrc {

enum class ErrorCode {
  kInvalidArgument,
  kConjugateViolation,
  kDegenerate,
  kInfeasibleSplit,
  kNoRelativeDegree,
  kUnobservable,
  kRelativeDegreeMismatch,
  kSingularMap,
  kNotHurwitz,
  kUnsupportedOrder,
  kUnstableBlowup,
  kConfig,
};

/// Stable identifier used in messages and JSON reports, e.g. "InfeasibleSplit".
std::string_view ErrorName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by the simulator when the state norm leaves the sane range.
class UnstableBlowup : public Error {
 public:
  explicit UnstableBlowup(double time)
      : Error(ErrorCode::kUnstableBlowup,
              "state norm exceeded 1e9 at t=" + std::to_string(time)),
        time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace adrc
