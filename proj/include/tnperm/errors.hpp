#pragma once

#include <stdexcept>
#include <string>

namespace tnperm {

/// Violated precondition on an argument (bad index, shape mismatch, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A request would exceed a configured size cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rotation requested for a stack whose mode has no rotational symmetry.
class UnsupportedTransformError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical evaluation produced a value outside its mathematical domain.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tnperm
