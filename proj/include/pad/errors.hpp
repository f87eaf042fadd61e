#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pad {

// Base of every error the library throws. Each subtype maps onto one CLI exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Raised when a solver state or gradient stops being finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Misuse of the tape API (non-scalar loss, double backward, foreign variable).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace pad
