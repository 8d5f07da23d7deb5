#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lucbat {

enum class ErrorCode {
  NotASyllable,
  MultipleToneMarks,
  InvalidPairCount,
  IndexOutOfRange,
  InvalidRuleTable,
  WrongSyllableCount,
  OddLineCount,
  UnparseableToken,
  EmptyInput,
  InvalidArgument,
  IoError,
  InvalidEncoding,
  EmptyGeneratedSet,
  EmptyPoem,
  ShapeMismatch,
  IdOutOfRange,
  DegenerateSequence,
  MissingPair,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (the CLI, the Python module) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lucbat
