#pragma once

#include <stdexcept>
#include <string>

namespace treepoly {

/// A transform or derived quantity does not exist for the requested input
/// (divergent Laplace transform, weak-disorder input to a strong-disorder
/// operation, and so on).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The requested enumeration would exceed the configured work budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed user input: law specs, grid specs, config files.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace treepoly
