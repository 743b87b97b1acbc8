#pragma once

#include <stdexcept>
#include <string>

namespace qmeas {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Operand shapes or factor dimensions do not match.
class DimensionError : public Error {
public:
  using Error::Error;
};

// Input failed the Hermiticity pre-check of an eigensolver call.
class NotHermitianError : public Error {
public:
  using Error::Error;
};

// Iteration budget exhausted before reaching the requested tolerance.
class NoConvergenceError : public Error {
public:
  using Error::Error;
};

// A scalar function was applied outside its domain (e.g. log of a
// negative eigenvalue beyond the clipping floor).
class DomainError : public Error {
public:
  using Error::Error;
};

// A value-level invariant failed (state normalization, weight sums, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

// Two independent computations of the same quantity disagree beyond
// the allowed tolerance.
class ConsistencyError : public Error {
public:
  using Error::Error;
};

// Lower bound exceeded upper bound beyond tolerance; signals an
// optimizer bug rather than a property of the input.
class BracketInversionError : public Error {
public:
  using Error::Error;
};

// Malformed or inconsistent configuration input.
class ConfigError : public Error {
public:
  using Error::Error;
};

// A fixed saturation probe failed; carries the probe name.
class ProbeFailure : public Error {
public:
  using Error::Error;
};

// An oracle self-check (computed vs expected) failed.
class OracleMismatch : public Error {
public:
  using Error::Error;
};

} // namespace qmeas
