#pragma once

#include <stdexcept>
#include <string>

namespace pcekit {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed system-definition document or expression (bad syntax, unknown
/// identifier, wrong distribution data arity). Carries the JSON path or the
/// offending symbol in the message.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A right-hand side that cannot be Galerkin-projected (division by a
/// variable, non-integer exponent, function of a state or parameter).
/// The message quotes the offending subexpression.
class NotGalerkinExpandable : public SchemaError {
 public:
  explicit NotGalerkinExpandable(const std::string& what, std::string subexpr)
      : SchemaError(what), subexpression(std::move(subexpr)) {}
  std::string subexpression;
};

/// Failure while building the expanded system.
class ComposeError : public Error {
 public:
  using Error::Error;
};

/// ODE integration failure (step underflow, non-finite derivative).
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double t) : Error(what), time_of_failure(t) {}
  double time_of_failure;
};

/// Density fit failure (degenerate variance, moments outside the beta family).
class FitError : public Error {
 public:
  explicit FitError(const std::string& what, double margin = 0.0)
      : Error(what), feasibility_margin(margin) {}
  /// How far the offending moment pair lies from the feasible region.
  double feasibility_margin;
};

}  // namespace pcekit
