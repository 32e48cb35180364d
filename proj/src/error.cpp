#include "stiction/error.hpp"

namespace stiction {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::UnparseableTimestamp: return "UnparseableTimestamp";
    case ErrorKind::NonNumericValue: return "NonNumericValue";
    case ErrorKind::OverlappingEpisodes: return "OverlappingEpisodes";
    case ErrorKind::SeriesTooShort: return "SeriesTooShort";
    case ErrorKind::InsufficientHistory: return "InsufficientHistory";
    case ErrorKind::SingularCovariance: return "SingularCovariance";
    case ErrorKind::LabelMisalignment: return "LabelMisalignment";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptySplit: return "EmptySplit";
    case ErrorKind::UnknownKind: return "UnknownKind";
    case ErrorKind::WrongKind: return "WrongKind";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::NumericFailure: return "NumericFailure";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SingularCovariance:
    case ErrorKind::NumericFailure:
      return ErrorCategory::numeric;
    case ErrorKind::UnknownKind:
    case ErrorKind::InvalidArgument:
      return ErrorCategory::usage;
    default:
      return ErrorCategory::data;
  }
}

}  // namespace stiction
