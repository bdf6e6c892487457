#pragma once

#include <stdexcept>
#include <string>

namespace rtnet {

// Raised when a caller violates a documented precondition (shape mismatch,
// empty input, unknown label, ...). Library code never aborts on bad input.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised for malformed files and I/O failures.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

}  // namespace rtnet
