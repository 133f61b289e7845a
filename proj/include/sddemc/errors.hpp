#pragma once

#include <stdexcept>
#include <string>

namespace sddemc {

// Raised for malformed or inconsistent run configuration (CLI exit code 2).
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a numerical computation breaks down: non-finite states,
// implicit steps without a real root, estimators starved of usable samples
// (CLI exit code 3).
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sddemc
