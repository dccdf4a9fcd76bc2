#pragma once

#include <stdexcept>
#include <string>

namespace lvgg {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters (negative penalties, mismatched dimensions, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A function evaluated outside its domain, e.g. log det of a matrix that is
// not positive definite.
class DomainError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf produced by arithmetic on matrices.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

class EigenSolverError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lvgg
