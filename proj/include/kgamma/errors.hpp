#pragma once

#include <stdexcept>
#include <string>

namespace kgamma {

/// Base of every error raised by the library. `exit_code()` is what the CLI
/// returns when the error escapes a subcommand.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

// Bad input: parameters out of range, invalid sequences, grids past a horizon.
class ValidationError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};
class ParameterError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class HorizonError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class DegreeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class InsufficientOrderError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Numerical budget exceeded.
class PrecisionError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};
class DepthError : public PrecisionError {
 public:
  using PrecisionError::PrecisionError;
};
class BracketError : public PrecisionError {
 public:
  using PrecisionError::PrecisionError;
};
class CancellationError : public PrecisionError {
 public:
  using PrecisionError::PrecisionError;
};
class NodeCollisionError : public PrecisionError {
 public:
  using PrecisionError::PrecisionError;
};

}  // namespace kgamma
