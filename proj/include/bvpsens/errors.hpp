#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bvpsens {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Expression text could not be parsed. Carries the byte offset of the
/// first offending token.
struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t offset_)
      : Error("syntax error at offset " + std::to_string(offset_) + ": " + msg),
        offset(offset_) {}
  std::size_t offset;
};

/// Expression evaluation failed.
struct EvalError : Error {
  using Error::Error;
};

/// A variable in the expression is not bound by the environment.
struct UnboundVariableError : EvalError {
  using EvalError::EvalError;
};

/// Evaluation left the domain of a function (log of a nonpositive value,
/// division by zero, fractional power of a nonpositive base).
struct DomainError : EvalError {
  using EvalError::EvalError;
};

/// A problem specification violates one of its structural constraints.
struct ValidationError : Error {
  using Error::Error;
};

/// A config file or CLI argument is malformed.
struct ConfigError : Error {
  using Error::Error;
};

/// An initial value problem failed to extend over the requested span
/// (state blow-up or step-size underflow).
struct ExtensionFailure : Error {
  using Error::Error;
};

/// A trajectory was evaluated outside its span.
struct SpanError : Error {
  using Error::Error;
};

/// Newton iteration exhausted its iteration budget.
struct MaxIterations : Error {
  using Error::Error;
};

/// The shooting Jacobian broke down numerically (tiny pivot) without the
/// boundary-functional matrix being structurally singular.
struct SingularJacobian : Error {
  using Error::Error;
};

/// The boundary-functional matrix M is numerically singular: the problem
/// fails the uniqueness (disconjugacy) surrogate.
struct DisconjugacyViolation : Error {
  using Error::Error;
};

/// A finite-difference perturbation would violate the ordering constraints
/// of the problem (a boundary point crossing its neighbour, c crossing x_k,
/// and so on).
struct PerturbationInfeasible : Error {
  using Error::Error;
};

}  // namespace bvpsens
