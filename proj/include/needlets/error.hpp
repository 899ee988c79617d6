#pragma once

#include <stdexcept>

namespace needlets {

/// Raised when an input violates a documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computed quantity fails an internal consistency check
/// (e.g. a real-valued result carrying a non-negligible imaginary part).
class NumericIntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace needlets
