#pragma once

#include <stdexcept>
#include <string>

namespace dbn {

// Base of every error thrown by the library. The CLI maps the three
// subclasses onto exit codes 1 (config), 2 (data) and 3 (numeric).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments, violated preconditions, malformed configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Unreadable, malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, degenerate numerics, failed convergence preconditions.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace dbn
