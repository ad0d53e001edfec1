#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scrbm {

/// Raised when a caller breaks an operation's preconditions (shapes, ranges).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation produced a non-finite value.
class NumericFault : public std::runtime_error {
 public:
  NumericFault(const std::string& what, std::size_t step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"),
        step_(step) {}
  explicit NumericFault(const std::string& what)
      : std::runtime_error(what), step_(static_cast<std::size_t>(-1)) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Malformed or structurally broken input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A brute-force enumeration would exceed its configured size limit.
class OracleLimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace scrbm
