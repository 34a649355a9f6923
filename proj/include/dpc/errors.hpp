#pragma once

#include <stdexcept>
#include <string>

namespace dpc {

// Argument outside the mathematical domain of an operation (negative
// radius, negative energy, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Self-energy formula evaluated outside its separation regime.
class RegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Operation applied to a density-matrix surrogate in the wrong state.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dpc
