#pragma once

#include <stdexcept>
#include <string>

namespace qig {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (matrix sizes, channel dimensions, parameter counts).
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A value violates a type invariant (non-Hermitian input, nonzero trace, ...).
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// A density matrix is not strictly positive (or falls below the positivity floor).
class NotPositive : public InvariantViolation {
 public:
  using InvariantViolation::InvariantViolation;
};

/// Argument outside the domain of an operation (t <= 0, beta out of range, n < 2, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An estimator bank fails the centering or calibration conditions.
class CalibrationError : public Error {
 public:
  CalibrationError(const std::string& what, double defect) : Error(what), defect_(defect) {}
  double defect() const noexcept { return defect_; }

 private:
  double defect_;
};

/// Fisher matrix is numerically singular; bounds are not computed.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or serialized input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qig
