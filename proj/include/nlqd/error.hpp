#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nlqd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Length/shape mismatch between a state and the operator acting on it.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Operation only defined for a particular local dimension (usually qubits).
class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Input failed structural validation (non-projector, non-hermitian, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A nonlinearity returned a non-finite value.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::size_t index)
      : Error(what + " (basis index " + std::to_string(index) + ")"), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Integration produced a non-finite amplitude.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step, long branch = -1)
      : Error(what + " at step " + std::to_string(step) +
              (branch >= 0 ? " in branch " + std::to_string(branch) : std::string{})),
        step_(step),
        branch_(branch) {}
  std::size_t step() const noexcept { return step_; }
  long branch() const noexcept { return branch_; }

 private:
  std::size_t step_;
  long branch_;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration rejected; message carries the JSON path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace nlqd
