#include "satemu/errors.h"

namespace satemu {

std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyTrace: return "EmptyTrace";
    case ErrorCode::kAllLost: return "AllLost";
    case ErrorCode::kInvalidEntry: return "InvalidEntry";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kWrongIndexing: return "WrongIndexing";
    case ErrorCode::kIndexingMismatch: return "IndexingMismatch";
    case ErrorCode::kMalformedDocument: return "MalformedDocument";
    case ErrorCode::kNoRecords: return "NoRecords";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kQueueFull: return "QueueFull";
    case ErrorCode::kValueOverflow: return "ValueOverflow";
    case ErrorCode::kEmptyImage: return "EmptyImage";
    case ErrorCode::kInvalidRole: return "InvalidRole";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kBindFailure: return "BindFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ToString(code)) + ": " + message),
      code_(code) {}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorCode::kParseError,
            "line " + std::to_string(line) + ": " + message),
      line_(line) {}

}  // namespace satemu
