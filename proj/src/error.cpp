#include "lucbat/error.hpp"

namespace lucbat {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotASyllable: return "NotASyllable";
    case ErrorCode::MultipleToneMarks: return "MultipleToneMarks";
    case ErrorCode::InvalidPairCount: return "InvalidPairCount";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidRuleTable: return "InvalidRuleTable";
    case ErrorCode::WrongSyllableCount: return "WrongSyllableCount";
    case ErrorCode::OddLineCount: return "OddLineCount";
    case ErrorCode::UnparseableToken: return "UnparseableToken";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidEncoding: return "InvalidEncoding";
    case ErrorCode::EmptyGeneratedSet: return "EmptyGeneratedSet";
    case ErrorCode::EmptyPoem: return "EmptyPoem";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::IdOutOfRange: return "IdOutOfRange";
    case ErrorCode::DegenerateSequence: return "DegenerateSequence";
    case ErrorCode::MissingPair: return "MissingPair";
  }
  return "Unknown";
}

}  // namespace lucbat
