#ifndef SATEMU_ERRORS_H_
#define SATEMU_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace satemu {

enum class ErrorCode {
  kEmptyTrace,
  kAllLost,
  kInvalidEntry,
  kLengthMismatch,
  kWrongIndexing,
  kIndexingMismatch,
  kMalformedDocument,
  kNoRecords,
  kParseError,
  kIoError,
  kQueueFull,
  kValueOverflow,
  kEmptyImage,
  kInvalidRole,
  kInvalidParams,
  kConfigError,
  kBindFailure,
};

std::string_view ToString(ErrorCode code);

// All module operations report failures through this type. The code is the
// stable part; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the canonical file readers; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace satemu

#endif  // SATEMU_ERRORS_H_
