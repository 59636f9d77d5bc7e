#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace slsoh {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller-side problems: bad arguments, malformed or missing inputs. The CLI
// maps these to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public InputError {
 public:
  using InputError::InputError;
};

class MissingInput : public InputError {
 public:
  using InputError::InputError;
};

// Data that is well formed but does not contain what an operation needs
// (no complete aging cycle, degenerate HPPC pulse, zero label, ...).
class DataError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace slsoh
