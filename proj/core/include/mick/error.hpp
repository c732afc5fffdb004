#pragma once

#include <stdexcept>
#include <string>

namespace mick {

// Base of every error the library throws. The CLI maps the concrete
// subclass to a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or dimension disagreement between tensors.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Input violates a documented precondition (bad span, too few classes,
// overlapping relation sets, malformed config value, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed record in an input file. The message carries the line number.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : ValidationError("line " + std::to_string(line) + ": " + reason), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Persisted data failed an integrity check.
class CorruptionError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace mick
