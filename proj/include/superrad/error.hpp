#pragma once

#include <stdexcept>
#include <string>

namespace superrad {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (malformed occupation, bad
/// probabilities, out-of-range level index, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Problem size exceeds what can be addressed or held in memory.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Cavity elimination is singular (kappa = 0 with explicit couplings).
class SingularEliminationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Lab-frame drive requested where a time-independent generator is needed.
class FrameError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Operation is defined only for a subset of systems (e.g. s = 2).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Adaptive integrator could not make progress.
class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& what, double t, double h)
      : Error(what), time_(t), step_(h) {}
  double time() const { return time_; }
  double step() const { return step_; }

 private:
  double time_;
  double step_;
};

/// Iterative procedure stopped before reaching its tolerance.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// A state that should be permutation symmetric is not.
class SymmetryViolationError : public Error {
 public:
  using Error::Error;
};

/// A numerical invariant failed beyond round-off.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace superrad
