#pragma once

#include <stdexcept>
#include <string>

namespace phf {

/// Base class for every error raised by the library. The CLI maps the
/// concrete subclasses onto its exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad input to an operation (invalid length, unsorted grid, unknown name).
class ArgumentError : public Error {
public:
  using Error::Error;
};

/// An iterative estimate did not settle within its budget.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

/// Grid or complex would exceed the configured memory budget.
class ResourceError : public Error {
public:
  using Error::Error;
};

/// The requested comparison does not apply to this fractal (bad radii).
class InapplicableError : public Error {
public:
  using Error::Error;
};

/// Closed form requested for a family layout it does not cover.
class UnsupportedStructureError : public Error {
public:
  using Error::Error;
};

/// Regression could not be fitted (too few distinct counts, empty degree).
class EstimationError : public Error {
public:
  using Error::Error;
};

/// Input violated a structural contract (e.g. non-monotone filtration).
class ContractViolation : public Error {
public:
  using Error::Error;
};

/// Integer result outside the representable range.
class RangeError : public Error {
public:
  using Error::Error;
};

/// Two routes that must agree did not.
class InternalError : public Error {
public:
  using Error::Error;
};

}  // namespace phf
