#pragma once

#include <stdexcept>
#include <string>

namespace entrolab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain where an operation is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A mathematical identity or inequality that must hold was observed to fail.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or unusable configuration (grid, CFL, mollifier scale, specs).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace entrolab
