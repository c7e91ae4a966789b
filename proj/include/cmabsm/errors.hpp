#pragma once

#include <stdexcept>
#include <string>

namespace cmabsm {

// Base for every error raised by the library. Subclasses name the violated
// contract so callers (the CLI in particular) can map them to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidDimensions : public Error {
 public:
  using Error::Error;
};

// C(N, K) exceeds the configured enumeration cap.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

// No strict first-order stochastic dominance order exists between the arms.
class DominanceViolation : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cmabsm
