#ifndef LVBAL_ERRORS_HPP_
#define LVBAL_ERRORS_HPP_

#include <stdexcept>

namespace lvbal {

/// Scenario configuration is invalid or cannot be read.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Profile or record data is malformed, incomplete or physically invalid.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical quantity is undefined for the given input (zero positive
/// sequence, voltage collapse, non-positive battery voltage, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace lvbal

#endif  // LVBAL_ERRORS_HPP_
