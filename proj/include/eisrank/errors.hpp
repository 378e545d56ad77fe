#pragma once

#include <stdexcept>
#include <string>

namespace eisrank {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Matrix or residue handed to an operation that needs a different ring
// (e.g. row reduction over a composite modulus).
class InvalidRingError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class NotAUnitError : public Error {
 public:
  using Error::Error;
};

class UndefinedValuationError : public Error {
 public:
  using Error::Error;
};

class CommutativityViolation : public Error {
 public:
  using Error::Error;
};

// A computed quantity contradicts a structural identity it must satisfy.
// Always a bug or a broken assumption, never a user error.
class InternalConsistencyError : public Error {
 public:
  using Error::Error;
};

class ResourceBoundError : public Error {
 public:
  using Error::Error;
};

class HypothesesNotSatisfied : public Error {
 public:
  using Error::Error;
};

}  // namespace eisrank
