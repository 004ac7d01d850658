#pragma once

#include <stdexcept>
#include <string>

namespace cokfluct {

/// Invalid ensemble or run configuration (maps to CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed block layout or mismatched matrix shapes.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An enumeration would exceed its built-in size guard.
class GuardError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Argument outside the domain of a closed-form quantity.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Trial carries a free part and cannot produce a centered rank vector.
class ExcludedTrial : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two reports or runs that cannot be compared (different p, d or zeta).
class ParameterMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace cokfluct
