#pragma once

#include <stdexcept>
#include <string>

namespace nlkpp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed user input: bad grid bounds, unparsable expressions, unknown keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (divergence, iterate crossing, cap exhausted).
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace nlkpp
