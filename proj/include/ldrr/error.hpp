#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ldrr {

enum class ErrorCode {
  InvalidArgument,
  NotCentered,
  SingularSigma,
  SingularSigmaW,
  SingularDesign,
  CholeskyFailure,
  NotConverged,
  EmptyClass,
  ClassMissingInFold,
  DimensionMismatch,
  KTooLarge,
  ParseError,
  MissingLabelColumn,
  NonNumericFeature,
  IoError,
  VersionMismatch,
};

std::string_view to_string(ErrorCode code);

// Coarse grouping used for process exit codes.
enum class ErrorClass { Usage, Data, Numeric };
ErrorClass classify(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ldrr
