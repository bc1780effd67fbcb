#ifndef FIBQKD_ERRORS_HPP
#define FIBQKD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fibqkd {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Invalid or inconsistent configuration.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A peer's messages cannot be explained by any honest execution.
class ProtocolViolation : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An operation was invoked in the wrong protocol state.
class StateError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

} // namespace fibqkd

#endif // FIBQKD_ERRORS_HPP
