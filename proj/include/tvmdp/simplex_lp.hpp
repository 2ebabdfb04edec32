#pragma once

#include "tvmdp/types.hpp"

namespace tvmdp {

// Small dense linear program
//   minimize c'x  subject to  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0.
// Either constraint block may be empty (0 rows).
struct LinearProgram {
  Vector c;
  Matrix A_eq;
  Vector b_eq;
  Matrix A_ub;
  Vector b_ub;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vector x;
  double value = 0.0;
};

// Two-phase primal simplex with Bland's rule. Intended for the small,
// well-scaled programs that arise from chain polytopes; throws
// InternalConsistencyError if the iteration guard trips.
LpResult solve_lp(const LinearProgram& lp);

}  // namespace tvmdp
