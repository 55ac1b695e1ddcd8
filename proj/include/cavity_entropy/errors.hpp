#pragma once

#include <stdexcept>
#include <string>

namespace cavity_entropy {

// Base of every error raised by the library. Callers that only care about
// "something numerical went wrong" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class TruncationError : public Error {
 public:
  using Error::Error;
};

class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class PositivityError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

class RootBracketError : public Error {
 public:
  using Error::Error;
};

class DegenerateEvidence : public Error {
 public:
  using Error::Error;
};

}  // namespace cavity_entropy
