#include "tcsf/common.hpp"

namespace tcsf {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::parse: return "parse";
    case ErrorCode::io: return "io";
    case ErrorCode::config: return "config";
    case ErrorCode::shape: return "shape";
    case ErrorCode::domain: return "domain";
    case ErrorCode::state: return "state";
    case ErrorCode::internal: return "internal";
  }
  return "unknown";
}

ParseError::ParseError(int line, std::string field, const std::string& message)
    : Error(ErrorCode::parse,
            "line " + std::to_string(line) + ", field '" + field + "': " + message),
      line_(line),
      field_(std::move(field)) {}

}  // namespace tcsf
