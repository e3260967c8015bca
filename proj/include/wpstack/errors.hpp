#pragma once

#include <stdexcept>
#include <string>

namespace wpstack {

// Bad input: malformed tuples, unsupported fields, weight mismatches.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A box or residue enumeration that would exceed the configured tuple budget.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, double volume)
      : std::runtime_error(what), volume_(volume) {}
  double volume() const noexcept { return volume_; }

 private:
  double volume_;
};

// Raised when the decomposition coordinate of a tuple sits too close to a
// fundamental-domain wall to decide which side it lies on.
class BoundaryAmbiguity : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Internal consistency check failed; always a bug.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace wpstack
