#pragma once

#include <stdexcept>
#include <string>

namespace specinv {

// Input violates a documented invariant (non-monotone filtration, bad grid, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Caller passed arguments outside an operation's precondition.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computed object failed an internal consistency check; indicates a
// malformed input that slipped past validation or a bug.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace specinv
