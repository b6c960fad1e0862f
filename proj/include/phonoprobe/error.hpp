#pragma once

#include <stdexcept>
#include <string>

namespace phonoprobe {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written (missing, truncated, ...).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Bad magic, unsupported version, malformed manifest or plan.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Dimensions disagree between two places that must agree.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// A domain invariant does not hold. `field()` names the offending field.
class InvariantViolation : public Error {
 public:
  InvariantViolation(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Caller passed arguments that break an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace phonoprobe
