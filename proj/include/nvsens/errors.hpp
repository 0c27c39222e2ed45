#pragma once

#include <stdexcept>
#include <string>

namespace nvsens {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

// Raised when a descriptor or argument violates an invariant. `field()` names
// the offending entry.
class ValidationError : public Error {
public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

class IoError : public Error {
public:
  using Error::Error;
};

class NumericalError : public Error {
public:
  using Error::Error;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class NotDiagonalError : public Error {
public:
  using Error::Error;
};

class LinearizationError : public Error {
public:
  using Error::Error;
};

class DegenerateContrastError : public Error {
public:
  using Error::Error;
};

class ZeroSlopeError : public Error {
public:
  using Error::Error;
};

class IndeterminateError : public Error {
public:
  using Error::Error;
};

}  // namespace nvsens
