#pragma once

#include <stdexcept>
#include <string>

namespace kpo {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Parameters outside the regime the model supports (e.g. K <= 0).
class UnsupportedRegime : public Error {
 public:
  using Error::Error;
};

class NoSolution : public Error {
 public:
  using Error::Error;
};

class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// The stroboscopic propagator drifted away from unitarity.
class IntegratorFailure : public Error {
 public:
  IntegratorFailure(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// A Husimi grid does not capture enough of the state's mass.
class DomainTooSmall : public Error {
 public:
  DomainTooSmall(const std::string& what, double captured)
      : Error(what), captured_(captured) {}
  double captured() const noexcept { return captured_; }

 private:
  double captured_;
};

class ReferenceUndefined : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or command line. Maps to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace kpo
