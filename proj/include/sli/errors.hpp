#pragma once

#include <stdexcept>
#include <string>

namespace sli {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vectors or ladders of incompatible size were combined.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of the operation (e.g. t outside [0, T]).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Integration lost unitarity or an eigensolve failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Probability reached the edge of the simulated momentum ladder.
class BasisOverflowError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class UnsupportedVersionError : public ParseError {
 public:
  using ParseError::ParseError;
};

}  // namespace sli
