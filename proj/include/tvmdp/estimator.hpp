#pragma once

#include "tvmdp/errors.hpp"
#include "tvmdp/types.hpp"

#include <utility>
#include <vector>

namespace tvmdp {

// One observed transition (s_{tau_k}, a_{tau_k}, s_{tau_k + 1}) collected at
// update time tau_k.
struct TransitionObservation {
  Index time = 0;
  Index state = 0;
  Index action = 0;
  Index next_state = 0;
};

// All transitions observed so far, one per update time, ordered by time.
struct TransitionDataset {
  Index n_states = 0;
  Index n_actions = 0;
  std::vector<TransitionObservation> triples;
};

struct SolverDiagnostics {
  Index iterations = 0;       // max over (s,a) subproblems
  double kkt_residual = 0.0;  // max over subproblems of |z - proj(z + grad)|_inf
  double objective = 0.0;     // log-likelihood at the returned point
  bool converged = true;
};

// A maximizer of the drift-constrained log-likelihood: one estimated kernel
// per update time. Rows never touched by data are completed to a feasible
// chain (uniform, or interpolated between observation-pinned rows).
struct ChainEstimate {
  std::vector<Index> update_times;
  std::vector<ControlledKernel> kernels;
  SolverDiagnostics diagnostics;
};

struct CmleOptions {
  double tol = 1e-10;
  Index max_iters = 50000;
  // Optional feasible initialization (kernel per update time). Empty means
  // uniform rows everywhere.
  std::vector<ControlledKernel> init;
};

struct CmleConvergenceError : ConvergenceError {
  ChainEstimate best;
  CmleConvergenceError(const std::string& msg, ChainEstimate iterate)
      : ConvergenceError(msg), best(std::move(iterate)) {}
};

// Maximizes sum_k log P_{tau_k}(s_{tau_k+1} | s_{tau_k}, a_{tau_k}) subject to
// simplex rows and coordinatewise drift boxes between consecutive update
// times. Decomposes by (s,a); each subproblem is solved by projected gradient
// ascent with Dykstra projection onto the constraint intersection.
ChainEstimate solve_cmle(const TransitionDataset& data, const Vector& drift,
                         const CmleOptions& options = {});

// Log-likelihood of `data` under a chain of kernels indexed like the dataset's
// update times.
double chain_log_likelihood(const TransitionDataset& data,
                            const std::vector<ControlledKernel>& kernels);

// Coordinate ranges of the latest-update-time kernel over the solution
// polytope, plus the per-(s,a) diameters.
struct UncertaintyIntervals {
  Index base_time = 0;     // update time the polytope refers to
  Index offset = 0;        // forecast lookahead (0 for the estimate itself)
  std::vector<Matrix> lo;  // [a](s, s')
  std::vector<Matrix> hi;
  Matrix diameter;         // u(s, a)
};

// Exact [min, max] of the latest kernel coordinate P(s_next | s, a) over the
// solution polytope, via two LPs on the per-(s,a) chain.
std::pair<double, double> polytope_coordinate_range(const TransitionDataset& data,
                                                    const Vector& drift,
                                                    const ChainEstimate& estimate, Index s,
                                                    Index a, Index s_next);

// Ranges for every coordinate and diameters for every (s,a).
UncertaintyIntervals polytope_ranges(const TransitionDataset& data, const Vector& drift,
                                     const ChainEstimate& estimate);

// u = min(1, 0.5 * sum_s' (hi - lo)): the coordinatewise upper bound on the
// total-variation diameter of the uncertainty set.
double uncertainty_diameter(const Vector& lo, const Vector& hi);

// Widens every coordinate range by the drift budget accumulated over
// [base+offset, base+offset+h), clamps to [0,1], and recomputes diameters.
// Requires base + offset + h <= horizon - 1.
UncertaintyIntervals forecast_uncertainty(const UncertaintyIntervals& base,
                                          const Vector& drift, Index h, Index horizon);

}  // namespace tvmdp
