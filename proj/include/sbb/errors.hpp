#pragma once

#include <stdexcept>
#include <string>

namespace sbb {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A column mapping or file-format problem (user misconfiguration).
class SchemaError : public Error {
  public:
    using Error::Error;
};

/// Data fails a hard invariant (bad weight, cluster crossing strata, ...).
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// Inputs to an operation are inconsistent with each other.
class AlignmentError : public Error {
  public:
    using Error::Error;
};

/// Generation or design specification is invalid.
class SpecError : public Error {
  public:
    using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
  public:
    using Error::Error;
};

/// Iterative fit failed (separation, non-convergence).
class ConvergenceError : public Error {
  public:
    using Error::Error;
};

} // namespace sbb
