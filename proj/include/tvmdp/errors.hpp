#pragma once

#include <stdexcept>
#include <string>

namespace tvmdp {

// Precondition violations: empty domains, mismatched dimensions, windows
// past the horizon, malformed schedules.
struct InvalidInputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Instance failed validate_instance and a consumer required a valid one.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iterative solver hit its iteration cap before reaching tolerance. The
// best iterate is still available from the solver's result structure.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A condition that can only arise from a bug (e.g. an LP over a set that
// provably contains the MLE point reports infeasible, or a propagated
// distribution loses mass).
struct InternalConsistencyError : std::logic_error {
  using std::logic_error::logic_error;
};

// Mixing certificate came back with eta = 0: the contraction-based bound
// is vacuous and must not be reported as a number.
struct AssumptionViolatedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tvmdp
