#pragma once

#include <stdexcept>
#include <string>

namespace xcorr {

/// Non-finite, out-of-range or otherwise unusable numeric parameter.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed data: non-uniform grids, NaNs, mismatched lengths, empty inputs.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation is not met (e.g. padding too short).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The sampled path does not cover the span required by the estimator.
class CoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A quantity that must be real, symmetric or nonnegative is not, beyond tolerance.
/// Almost always a quadrature failure.
class NumericalConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A bound is undefined for the given inputs (empty parameter set, zero scale).
class DegenerateBound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An entropy integral required by a bound was flagged divergent.
class BoundUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace xcorr
