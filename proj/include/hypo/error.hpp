#pragma once

#include <stdexcept>
#include <string>

namespace hypo {

/// Rejected input: grid sizes, accommodation, CFL, unknown keys.
class InvalidConfig : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Cross-section violates the positivity / boundedness hypotheses.
class AssumptionViolation : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Eigensolve or integrator did not converge, or a state went non-finite.
class NumericalFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Neumann Poisson data with nonzero mean beyond tolerance.
class CompatibilityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace hypo
