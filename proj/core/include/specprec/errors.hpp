#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace specprec {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: shape mismatches, out-of-range parameters, bad files.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment or command configuration. `field` is a dotted path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Base class for failures of the numerics themselves.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public NumericalError {
 public:
  SingularityError(double smallest_pivot, double condition_estimate);
  double smallest_pivot() const noexcept { return pivot_; }
  double condition_estimate() const noexcept { return cond_; }

 private:
  double pivot_;
  double cond_;
};

/// A matrix that was declared self-adjoint (in H_K) failed the symmetry check.
class ConsistencyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NotPsdError : public NumericalError {
 public:
  explicit NotPsdError(double min_eigenvalue);
  double min_eigenvalue() const noexcept { return min_eig_; }

 private:
  double min_eig_;
};

class UndefinedConditionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The requested preconditioner level has a non-positive (or too small) tail eigenvalue.
class LevelTooDeepError : public NumericalError {
 public:
  LevelTooDeepError(std::size_t requested, std::size_t max_admissible, double tail);
  std::size_t requested() const noexcept { return requested_; }
  std::size_t max_admissible() const noexcept { return max_admissible_; }

 private:
  std::size_t requested_;
  std::size_t max_admissible_;
};

class StepSizeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EstimationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class GramIntegrityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace specprec
