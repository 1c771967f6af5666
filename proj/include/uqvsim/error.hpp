#pragma once

#include <stdexcept>
#include <string>

namespace uqvsim {

// Exception hierarchy. Each class maps onto one process exit code of the CLI.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 3; }
};

/// Invalid or inconsistent experiment configuration (exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 1; }
};

/// Malformed input data or data that violates an operation's precondition
/// (exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// A computed value broke one of the library's own invariants (exit code 3).
class InvariantError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

}  // namespace uqvsim
