#pragma once

#include <stdexcept>
#include <string>

namespace mlab {

// Invalid user-supplied configuration (bad geometry, density out of range,
// size guard exceeded). The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Internal invariant broken. The CLI maps this to exit code 1.
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

}  // namespace mlab
