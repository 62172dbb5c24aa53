#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace blrain {

enum class ErrorCode {
  NonPositiveParameter,
  AlphaBelowMinimum,
  UnsupportedShape,
  AlphaTooSmall,
  ZeroVariance,
  HorizonNonPositive,
  NonDividingBin,
  ParseError,
  NonMonotoneTimestamps,
  NegativeDepth,
  InsufficientYears,
  AllDryMonth,
  NoWetIntervals,
  NoCompleteYears,
  NoFeasibleStart,
  NonConvergence,
  ThresholdNotBracketed,
  SingularCurvature,
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. `code()` identifies the failure class; `subject()`
/// names the offending field, file or statistic when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string subject, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        subject_(std::move(subject)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  ErrorCode code_;
  std::string subject_;
};

}  // namespace blrain
