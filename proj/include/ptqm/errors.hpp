#pragma once

#include <stdexcept>
#include <string>

namespace ptqm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or dimensions that do not fit together.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// An input violates a numerical invariant; `value` is the measured quantity.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, double value) : Error(what), value_(value) {}
  double value() const noexcept { return value_; }

 private:
  double value_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The fixed-step integrator could not hold the metric norm.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double drift) : Error(what), drift_(drift) {}
  double drift() const noexcept { return drift_; }

 private:
  double drift_;
};

/// Fock truncation too small for the requested amplitude.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, long required) : Error(what), required_(required) {}
  long required_truncation() const noexcept { return required_; }

 private:
  long required_;
};

/// The time grid is too coarse to follow the phase between samples.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Two independent evaluation routes disagree.
class ConsistencyError : public Error {
 public:
  ConsistencyError(const std::string& what, double discrepancy)
      : Error(what), discrepancy_(discrepancy) {}
  double discrepancy() const noexcept { return discrepancy_; }

 private:
  double discrepancy_;
};

}  // namespace ptqm
