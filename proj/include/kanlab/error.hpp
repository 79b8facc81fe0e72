#pragma once

#include <stdexcept>
#include <string>

namespace kanlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Newton/bisection refinement did not reach the requested residual.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// A dynamical invariant (boundary invariance, positivity, ...) was violated.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Caller supplied arguments outside an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace kanlab
