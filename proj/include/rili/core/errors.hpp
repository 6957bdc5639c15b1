#pragma once

#include <stdexcept>
#include <string>

namespace rili {

// Base for every error raised by the library. Callers that only care about
// "something in rili failed" can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or dimension mismatch, malformed permutation, wrong strategy tag.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Precondition violated by the caller (empty input, step after done, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Out-of-order interaction indices.
class SequencingError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf encountered in a loss, gradient or parameter.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent experiment configuration / missing checkpoint.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rili
