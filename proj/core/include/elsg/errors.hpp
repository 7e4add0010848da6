#pragma once

#include <stdexcept>
#include <string>

namespace elsg {

// Bad or inconsistent configuration: malformed files, unknown keys, parameter
// combinations the toolkit refuses to run with.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument or state outside an operation's domain (e.g. a state outside the
// inflated safe set handed to the safety filter).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values or a broken numerical invariant at runtime.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A verified modelling assumption does not hold; message carries the worst
// witness found by the sweep.
class AssumptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameter synthesis could not certify a value (empty interval, nonpositive
// clearance, ...).
class SynthesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace elsg
