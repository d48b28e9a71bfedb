#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace driftwatch {

/// Base for all recoverable errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed telemetry or document input. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Raised when a caller violates an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

inline void require(bool condition, const char* message) {
  if (!condition) throw PreconditionError(message);
}

}  // namespace driftwatch
