#pragma once

#include <stdexcept>
#include <string>

namespace transim {

/// Bad argument or violated precondition (dimension mismatch, out-of-range index, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input that should have satisfied a mathematical contract but did not
/// (e.g. a non-Hermitian matrix handed to the Hermitian eigensolver).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Any failure of a numerical procedure. Subclasses narrow the cause.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A closed-form expression hit a vanishing denominator.
class SingularityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A search or extraction did not find what it was looking for.
class SearchError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A calibration pipeline stage failed; `stage()` names it.
class CalibrationError : public NumericalError {
 public:
  CalibrationError(std::string stage, const std::string& what)
      : NumericalError(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Configuration parse or validation failure; `path()` is the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace transim
