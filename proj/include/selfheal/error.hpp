#pragma once

#include <stdexcept>
#include <string>

namespace selfheal {

enum class ErrorKind {
  Parse,
  Config,
  Structural,
  Domain,
  SpareExhausted,
  CapacityExhausted,
  Property,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Parse error carrying a 1-based line number (0 when not line-specific).
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace selfheal
