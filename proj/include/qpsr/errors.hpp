#pragma once

#include <stdexcept>
#include <string>

namespace qpsr {

// Raised when a numerical validity guard trips at runtime: an invalid shift
// angle, a singular information matrix, a broken completeness relation.
// Contract violations (wrong sizes, bad indices, malformed configs) use
// std::invalid_argument instead.
class numerical_guard_error : public std::runtime_error {
 public:
  explicit numerical_guard_error(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace qpsr
