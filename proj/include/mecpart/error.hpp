#pragma once

#include <stdexcept>
#include <string>

namespace mecpart {

/// Invalid physical or algorithmic parameter (nonpositive distance, lo > hi, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A partitioning action or derived structure violates its invariants.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// No one-to-one schedule exists for the given delay matrix.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training diverged (non-finite loss or parameters).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mecpart
