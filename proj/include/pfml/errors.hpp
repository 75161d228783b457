#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pfml {

// Base class for all domain errors raised by the workbench.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Text could not be parsed; `position` is a 0-based offset into the input.
struct SyntaxError : Error {
  SyntaxError(std::size_t position, std::string expected)
      : Error("syntax error at position " + std::to_string(position) +
              ": expected " + expected),
        position(position),
        expected(std::move(expected)) {}
  std::size_t position;
  std::string expected;
};

struct UnknownStateError : Error {
  explicit UnknownStateError(const std::string& name)
      : Error("unknown state: " + name) {}
};

struct UnknownAtomError : Error {
  explicit UnknownAtomError(const std::string& name)
      : Error("unknown atom: " + name) {}
};

struct UnknownRoleError : Error {
  explicit UnknownRoleError(const std::string& name)
      : Error("unknown role: " + name) {}
};

struct UnboundVariableError : Error {
  explicit UnboundVariableError(const std::string& name)
      : Error("unbound variable: " + name) {}
};

struct LengthMismatchError : Error {
  using Error::Error;
};

struct MarginalInvalidError : Error {
  using Error::Error;
};

struct SupportTooLargeError : Error {
  using Error::Error;
};

struct IncompleteStrategyError : Error {
  using Error::Error;
};

struct NotNonexpansiveError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace pfml
