#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stiction {

enum class ErrorKind {
  EmptyInput,
  UnparseableTimestamp,
  NonNumericValue,
  OverlappingEpisodes,
  SeriesTooShort,
  InsufficientHistory,
  SingularCovariance,
  LabelMisalignment,
  ShapeMismatch,
  LengthMismatch,
  EmptySplit,
  UnknownKind,
  WrongKind,
  SingleClass,
  NumericFailure,
  InvalidArgument,
  FormatError,
  IoFailure,
};

std::string_view to_string(ErrorKind kind);

// Coarse grouping used for process exit codes.
enum class ErrorCategory { usage, data, numeric };
ErrorCategory category_of(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace stiction
