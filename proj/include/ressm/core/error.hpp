#pragma once

#include <stdexcept>
#include <string>

namespace ressm {

/// Raised when a factorization or draw fails in a way that points at
/// corrupted chain state (non-SPD precision, non-finite values).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: inconsistent dimensions, out-of-range hyperparameters.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File-level failures: missing files, CRC mismatch, malformed manifests.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ressm
