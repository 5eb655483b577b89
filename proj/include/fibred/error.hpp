#pragma once

#include <stdexcept>
#include <string>

namespace fibred {

/// Base class for all library errors. `exit_code()` is what the CLI returns.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 2; }
};

/// Malformed input: non-normalised weights, non-finite points, bad config.
class ValidationError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 1; }
};

class DegenerateCellError : public Error {
 public:
  using Error::Error;
};

/// Two fibred measures do not share a label marginal; their fibred distance
/// is infinite.
class IncomparableMarginalsError : public Error {
 public:
  using Error::Error;
};

class BudgetError : public Error {
 public:
  using Error::Error;
};

class InvalidPotentialError : public Error {
 public:
  using Error::Error;
};

class NonatomicRequiredError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// A particle state became non-finite or left the a-priori ball by a wide
/// margin.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, int step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  int step() const noexcept { return step_; }
  int exit_code() const noexcept override { return 3; }

 private:
  int step_;
};

}  // namespace fibred
