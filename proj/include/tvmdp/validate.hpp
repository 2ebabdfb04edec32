#pragma once

#include "tvmdp/types.hpp"

#include <string>
#include <vector>

namespace tvmdp {

struct ValidationIssue {
  enum class Kind { Shape, RowSum, Range, Drift, NonFinite, Schedule };
  Kind kind;
  Index t = -1;
  Index s = -1;
  Index a = -1;
  Index s_next = -1;
  double value = 0.0;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
};

// Checks every TvMdp invariant and reports each violation with its indices:
// row sums within kRowSumTol of 1, entries in [0,1], rewards finite, and
// |P_{t+1} - P_t| <= drift(t) + kDriftSlack coordinatewise for t < T-1.
// Never repairs anything.
ValidationReport validate_instance(const TvMdp& M);

// Checks tau_0 = 0, strict monotonicity, and all times in [0, T).
ValidationReport validate_schedule(const UpdateSchedule& schedule, Index horizon);

// Throws ValidationError carrying the first issue if the instance is invalid.
void require_valid(const TvMdp& M);

}  // namespace tvmdp
