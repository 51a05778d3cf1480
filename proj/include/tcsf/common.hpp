#pragma once

#include <stdexcept>
#include <string>

namespace tcsf {

enum class ErrorCode {
  invalid_argument = 1,
  parse = 2,
  io = 3,
  config = 4,
  shape = 5,
  domain = 6,
  state = 7,
  internal = 8,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Malformed input text; carries the 1-based line number and the field name.
class ParseError : public Error {
 public:
  ParseError(int line, std::string field, const std::string& message);
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

}  // namespace tcsf
