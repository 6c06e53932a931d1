#pragma once

#include <stdexcept>
#include <string>

namespace qres {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Operand shapes or qubit counts that do not fit together.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A quantum state that no longer satisfies its invariants.
class StateCorruptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure of an underlying numerical routine.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment or protocol configuration.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace qres
