#include "tvmdp/estimator.hpp"

#include "tvmdp/simplex_lp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tvmdp {

namespace {

constexpr double kLogFloor = 1e-12;
constexpr double kDykstraTol = 1e-14;
constexpr double kFeasibilityTol = 1e-12;
constexpr Index kDykstraMaxSweeps = 20000;

// Euclidean projection onto the probability simplex (sort-based).
Vector project_to_simplex(const Vector& v) {
  const Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumulative = 0.0;
  double theta = 0.0;
  Index rho = 0;
  for (Index j = 0; j < n; ++j) {
    cumulative += u[static_cast<size_t>(j)];
    const double candidate = (1.0 - cumulative) / static_cast<double>(j + 1);
    if (u[static_cast<size_t>(j)] + candidate > 0.0) {
      rho = j + 1;
      theta = candidate;
    }
  }
  (void)rho;
  return (v.array() + theta).max(0.0);
}

// Per-(s,a) chain after eliminating rows that carry neither an observation
// nor the query. Eliminated rows can always interpolate between the kept
// ones, so the reduction is exact for both the MLE and the polytope ranges.
struct ReducedChain {
  std::vector<Index> anchors;   // update indices kept, ascending
  std::vector<double> budgets;  // aggregated drift between consecutive anchors
  std::vector<Index> observed;  // observed next state per anchor, -1 if none
};

double aggregated_budget(const std::vector<Index>& update_times, const Vector& drift,
                         Index k_from, Index k_to) {
  double budget = 0.0;
  for (Index t = update_times[static_cast<size_t>(k_from)];
       t < update_times[static_cast<size_t>(k_to)]; ++t)
    budget += drift(t);
  return budget;
}

ReducedChain reduce_chain(const std::vector<Index>& update_times, const Vector& drift,
                          const std::vector<std::pair<Index, Index>>& observations,
                          Index query_index) {
  ReducedChain chain;
  for (const auto& [k, next_state] : observations) {
    chain.anchors.push_back(k);
    chain.observed.push_back(next_state);
  }
  if (query_index >= 0 && (chain.anchors.empty() || chain.anchors.back() != query_index)) {
    chain.anchors.push_back(query_index);
    chain.observed.push_back(-1);
  }
  for (size_t r = 1; r < chain.anchors.size(); ++r)
    chain.budgets.push_back(
        aggregated_budget(update_times, drift, chain.anchors[r - 1], chain.anchors[r]));
  return chain;
}

// Largest simplex or band violation of a chain of rows.
double chain_violation(const std::vector<Vector>& rows, const std::vector<double>& budgets) {
  double violation = 0.0;
  for (const Vector& row : rows) {
    violation = std::max(violation, std::abs(row.sum() - 1.0));
    violation = std::max(violation, -row.minCoeff());
  }
  for (size_t r = 1; r < rows.size(); ++r)
    violation = std::max(violation, (rows[r] - rows[r - 1]).cwiseAbs().maxCoeff() -
                                        budgets[r - 1]);
  return violation;
}

// Dykstra's alternating projections onto the intersection of the per-row
// simplexes and the per-pair drift bands. Movement alone is not a safe stop
// signal (a sweep can be transiently quiet while constraints are still
// violated), so the loop also requires near-feasibility before exiting.
void dykstra_project(std::vector<Vector>& rows, const std::vector<double>& budgets) {
  const auto R = static_cast<Index>(rows.size());
  if (R == 0) return;
  const Index S = rows.front().size();
  if (R == 1) {
    rows[0] = project_to_simplex(rows[0]);
    return;
  }

  std::vector<Vector> simplex_corr(static_cast<size_t>(R), Vector::Zero(S));
  std::vector<Matrix> band_corr(static_cast<size_t>(R) - 1, Matrix::Zero(2, S));

  for (Index sweep = 0; sweep < kDykstraMaxSweeps; ++sweep) {
    double movement = 0.0;
    for (Index r = 0; r < R; ++r) {
      const Vector y = rows[static_cast<size_t>(r)] + simplex_corr[static_cast<size_t>(r)];
      const Vector projected = project_to_simplex(y);
      simplex_corr[static_cast<size_t>(r)] = y - projected;
      movement = std::max(movement,
                          (projected - rows[static_cast<size_t>(r)]).cwiseAbs().maxCoeff());
      rows[static_cast<size_t>(r)] = projected;
    }
    for (Index r = 1; r < R; ++r) {
      Matrix& corr = band_corr[static_cast<size_t>(r) - 1];
      const double budget = budgets[static_cast<size_t>(r) - 1];
      for (Index j = 0; j < S; ++j) {
        double lo = rows[static_cast<size_t>(r) - 1](j) + corr(0, j);
        double hi = rows[static_cast<size_t>(r)](j) + corr(1, j);
        const double y_lo = lo;
        const double y_hi = hi;
        const double diff = hi - lo;
        if (std::abs(diff) > budget) {
          const double excess = (std::abs(diff) - budget) / 2.0;
          const double sign = diff > 0.0 ? 1.0 : -1.0;
          lo += sign * excess;
          hi -= sign * excess;
        }
        corr(0, j) = y_lo - lo;
        corr(1, j) = y_hi - hi;
        movement =
            std::max({movement, std::abs(lo - rows[static_cast<size_t>(r) - 1](j)),
                      std::abs(hi - rows[static_cast<size_t>(r)](j))});
        rows[static_cast<size_t>(r) - 1](j) = lo;
        rows[static_cast<size_t>(r)](j) = hi;
      }
    }
    if (movement < kDykstraTol && chain_violation(rows, budgets) < kFeasibilityTol) break;
  }
}

double chain_objective(const std::vector<Vector>& rows, const ReducedChain& chain) {
  double value = 0.0;
  for (size_t r = 0; r < rows.size(); ++r)
    if (chain.observed[r] >= 0)
      value += std::log(std::max(rows[r](chain.observed[r]), kLogFloor));
  return value;
}

std::vector<Vector> chain_gradient(const std::vector<Vector>& rows,
                                   const ReducedChain& chain) {
  std::vector<Vector> grad(rows.size(), Vector::Zero(rows.front().size()));
  for (size_t r = 0; r < rows.size(); ++r)
    if (chain.observed[r] >= 0)
      grad[r](chain.observed[r]) = 1.0 / std::max(rows[r](chain.observed[r]), kLogFloor);
  return grad;
}

struct ChainSolution {
  std::vector<Vector> rows;
  Index iterations = 0;
  double kkt_residual = 0.0;
  bool converged = true;
};

// Projected gradient ascent with backtracking on the concave log-likelihood.
ChainSolution maximize_chain(const ReducedChain& chain, std::vector<Vector> rows,
                             double tol, Index max_iters) {
  ChainSolution solution;
  dykstra_project(rows, chain.budgets);
  double f_best = chain_objective(rows, chain);
  double step = 0.25;
  Index small_improvements = 0;
  bool converged = false;
  Index iter = 0;

  for (; iter < max_iters; ++iter) {
    const std::vector<Vector> grad = chain_gradient(rows, chain);
    bool accepted = false;
    double improvement = 0.0;
    for (int trial = 0; trial < 60 && !accepted; ++trial) {
      std::vector<Vector> candidate = rows;
      for (size_t r = 0; r < rows.size(); ++r) candidate[r] += step * grad[r];
      dykstra_project(candidate, chain.budgets);
      if (chain_violation(candidate, chain.budgets) > 1e-10) {
        step *= 0.5;  // projection did not settle; an infeasible point would
        continue;     // fake an objective gain through coordinates above 1
      }
      const double f_candidate = chain_objective(candidate, chain);
      if (f_candidate > f_best) {
        improvement = f_candidate - f_best;
        rows = std::move(candidate);
        f_best = f_candidate;
        accepted = true;
      } else {
        step *= 0.5;
      }
    }
    if (!accepted) {
      converged = true;  // no feasible ascent direction at machine scale
      break;
    }
    step = std::min(step * 1.5, 4.0);
    if (improvement < tol) {
      if (++small_improvements >= 3) {
        converged = true;
        ++iter;
        break;
      }
    } else {
      small_improvements = 0;
    }
  }

  const std::vector<Vector> grad = chain_gradient(rows, chain);
  std::vector<Vector> shifted = rows;
  for (size_t r = 0; r < rows.size(); ++r) shifted[r] += grad[r];
  dykstra_project(shifted, chain.budgets);
  double residual = 0.0;
  for (size_t r = 0; r < rows.size(); ++r)
    residual = std::max(residual, (shifted[r] - rows[r]).cwiseAbs().maxCoeff());

  solution.rows = std::move(rows);
  solution.iterations = iter;
  solution.kkt_residual = residual;
  solution.converged = converged;
  return solution;
}

// Observations grouped by (s,a): (update index, next state), ascending in k.
std::vector<std::vector<std::pair<Index, Index>>> group_observations(
    const TransitionDataset& data) {
  std::vector<std::vector<std::pair<Index, Index>>> groups(
      static_cast<size_t>(data.n_states * data.n_actions));
  for (size_t k = 0; k < data.triples.size(); ++k) {
    const TransitionObservation& obs = data.triples[k];
    groups[static_cast<size_t>(obs.state * data.n_actions + obs.action)].emplace_back(
        static_cast<Index>(k), obs.next_state);
  }
  return groups;
}

void check_dataset(const TransitionDataset& data, const Vector& drift) {
  if (data.triples.empty()) throw InvalidInputError("cmle: dataset is empty");
  if (data.n_states <= 0 || data.n_actions <= 0)
    throw InvalidInputError("cmle: dataset must carry state/action counts");
  Index previous = -1;
  for (const TransitionObservation& obs : data.triples) {
    if (obs.time <= previous)
      throw InvalidInputError("cmle: observations must be strictly ordered by time");
    previous = obs.time;
    if (obs.state < 0 || obs.state >= data.n_states || obs.next_state < 0 ||
        obs.next_state >= data.n_states || obs.action < 0 || obs.action >= data.n_actions)
      throw InvalidInputError("cmle: observation indices out of range");
    if (obs.time >= drift.size())
      throw InvalidInputError("cmle: observation time outside the drift array");
  }
  if (drift.minCoeff() < 0.0) throw InvalidInputError("cmle: negative drift budget");
}

// Fills a full chain of rows for one (s,a) from the anchor solution: copy
// before the first anchor and after the last, interpolate with
// budget-proportional steps in between. The result satisfies every per-step
// drift box whenever the anchors satisfy the aggregated ones.
std::vector<Vector> expand_anchor_rows(const std::vector<Index>& update_times,
                                       const Vector& drift, const ReducedChain& chain,
                                       const std::vector<Vector>& anchor_rows, Index S) {
  const auto K = static_cast<Index>(update_times.size());
  std::vector<Vector> full(static_cast<size_t>(K), Vector::Constant(S, 1.0 / double(S)));
  if (chain.anchors.empty()) return full;

  for (size_t r = 0; r < chain.anchors.size(); ++r)
    full[static_cast<size_t>(chain.anchors[r])] = anchor_rows[r];
  for (Index k = 0; k < chain.anchors.front(); ++k) full[static_cast<size_t>(k)] = anchor_rows.front();
  for (Index k = chain.anchors.back() + 1; k < K; ++k)
    full[static_cast<size_t>(k)] = anchor_rows.back();

  for (size_t r = 1; r < chain.anchors.size(); ++r) {
    const Index k_from = chain.anchors[r - 1];
    const Index k_to = chain.anchors[r];
    const double total = chain.budgets[r - 1];
    double used = 0.0;
    for (Index k = k_from + 1; k < k_to; ++k) {
      used += aggregated_budget(update_times, drift, k - 1, k);
      const double lambda = total > 0.0 ? std::min(used / total, 1.0) : 0.0;
      full[static_cast<size_t>(k)] =
          (1.0 - lambda) * anchor_rows[r - 1] + lambda * anchor_rows[r];
    }
  }
  return full;
}

}  // namespace

double chain_log_likelihood(const TransitionDataset& data,
                            const std::vector<ControlledKernel>& kernels) {
  double value = 0.0;
  for (size_t k = 0; k < data.triples.size(); ++k) {
    const TransitionObservation& obs = data.triples[k];
    value += std::log(std::max(
        kernels[k][static_cast<size_t>(obs.action)](obs.state, obs.next_state), kLogFloor));
  }
  return value;
}

ChainEstimate solve_cmle(const TransitionDataset& data, const Vector& drift,
                         const CmleOptions& options) {
  check_dataset(data, drift);
  if (options.tol <= 0.0) throw InvalidInputError("cmle: tol must be positive");

  const Index S = data.n_states;
  const Index A = data.n_actions;
  const auto K = static_cast<Index>(data.triples.size());

  ChainEstimate estimate;
  estimate.update_times.reserve(static_cast<size_t>(K));
  for (const TransitionObservation& obs : data.triples)
    estimate.update_times.push_back(obs.time);
  estimate.kernels.assign(static_cast<size_t>(K),
                          ControlledKernel(static_cast<size_t>(A),
                                           Matrix::Constant(S, S, 1.0 / double(S))));

  const auto groups = group_observations(data);
  SolverDiagnostics diag;
  diag.iterations = 0;
  diag.kkt_residual = 0.0;
  diag.converged = true;

  for (Index s = 0; s < S; ++s) {
    for (Index a = 0; a < A; ++a) {
      const auto& observations = groups[static_cast<size_t>(s * A + a)];
      if (observations.empty()) continue;  // uniform rows already in place
      const ReducedChain chain =
          reduce_chain(estimate.update_times, drift, observations, -1);

      std::vector<Vector> init(chain.anchors.size(), Vector::Constant(S, 1.0 / double(S)));
      if (!options.init.empty()) {
        for (size_t r = 0; r < chain.anchors.size(); ++r)
          init[r] = options.init[static_cast<size_t>(chain.anchors[r])]
                        [static_cast<size_t>(a)]
                            .row(s)
                            .transpose();
      }
      ChainSolution solution =
          maximize_chain(chain, std::move(init), options.tol, options.max_iters);
      diag.iterations = std::max(diag.iterations, solution.iterations);
      diag.kkt_residual = std::max(diag.kkt_residual, solution.kkt_residual);
      diag.converged = diag.converged && solution.converged;

      const std::vector<Vector> full =
          expand_anchor_rows(estimate.update_times, drift, chain, solution.rows, S);
      for (Index k = 0; k < K; ++k)
        estimate.kernels[static_cast<size_t>(k)][static_cast<size_t>(a)].row(s) =
            full[static_cast<size_t>(k)].transpose();
    }
  }

  diag.objective = chain_log_likelihood(data, estimate.kernels);
  estimate.diagnostics = diag;
  if (!diag.converged)
    throw CmleConvergenceError("cmle: iteration cap reached before tolerance", estimate);
  return estimate;
}

namespace {

// Polytope description for one (s,a) as an LP over the anchor rows. Observed
// coordinates are pinned to the MLE values; bands carry aggregated budgets.
LinearProgram chain_range_lp(const ReducedChain& chain,
                             const std::vector<Vector>& pinned_values, Index S,
                             Index query_coord, bool maximize) {
  const auto R = static_cast<Index>(chain.anchors.size());
  const Index n = R * S;

  Index n_pins = 0;
  for (Index r = 0; r < R; ++r)
    if (chain.observed[static_cast<size_t>(r)] >= 0) ++n_pins;

  LinearProgram lp;
  lp.c = Vector::Zero(n);
  lp.c((R - 1) * S + query_coord) = maximize ? -1.0 : 1.0;

  lp.A_eq = Matrix::Zero(R + n_pins, n);
  lp.b_eq = Vector::Zero(R + n_pins);
  for (Index r = 0; r < R; ++r) {
    lp.A_eq.block(r, r * S, 1, S).setOnes();
    lp.b_eq(r) = 1.0;
  }
  Index pin_row = R;
  for (Index r = 0; r < R; ++r) {
    const Index j = chain.observed[static_cast<size_t>(r)];
    if (j < 0) continue;
    lp.A_eq(pin_row, r * S + j) = 1.0;
    lp.b_eq(pin_row) = pinned_values[static_cast<size_t>(r)](j);
    ++pin_row;
  }

  const Index n_bands = (R - 1) * S;
  lp.A_ub = Matrix::Zero(2 * n_bands, n);
  lp.b_ub = Vector::Zero(2 * n_bands);
  Index row = 0;
  for (Index r = 1; r < R; ++r) {
    const double budget = chain.budgets[static_cast<size_t>(r) - 1];
    for (Index j = 0; j < S; ++j) {
      lp.A_ub(row, r * S + j) = 1.0;
      lp.A_ub(row, (r - 1) * S + j) = -1.0;
      lp.b_ub(row) = budget;
      ++row;
      lp.A_ub(row, r * S + j) = -1.0;
      lp.A_ub(row, (r - 1) * S + j) = 1.0;
      lp.b_ub(row) = budget;
      ++row;
    }
  }
  return lp;
}

std::pair<double, double> coordinate_range_for_chain(const ReducedChain& chain,
                                                     const std::vector<Vector>& pinned,
                                                     Index S, Index coord) {
  const size_t last = chain.anchors.size() - 1;
  if (chain.observed[last] == coord) {
    const double v = pinned[last](coord);
    return {v, v};
  }
  const LinearProgram lp_min = chain_range_lp(chain, pinned, S, coord, false);
  const LpResult lo = solve_lp(lp_min);
  const LinearProgram lp_max = chain_range_lp(chain, pinned, S, coord, true);
  const LpResult hi = solve_lp(lp_max);
  if (lo.status != LpStatus::Optimal || hi.status != LpStatus::Optimal)
    throw InternalConsistencyError(
        "polytope range LP not optimal although the MLE point is feasible");
  return {std::clamp(lo.value, 0.0, 1.0), std::clamp(-hi.value, 0.0, 1.0)};
}

struct ChainContext {
  ReducedChain chain;
  std::vector<Vector> pinned;  // MLE anchor rows
};

ChainContext build_range_context(const TransitionDataset& data, const Vector& drift,
                                 const ChainEstimate& estimate, Index s, Index a) {
  const auto groups = group_observations(data);
  const auto& observations = groups[static_cast<size_t>(s * data.n_actions + a)];
  const auto K = static_cast<Index>(estimate.update_times.size());

  ChainContext context;
  context.chain = reduce_chain(estimate.update_times, drift, observations, K - 1);
  for (size_t r = 0; r < context.chain.anchors.size(); ++r)
    context.pinned.push_back(
        estimate.kernels[static_cast<size_t>(context.chain.anchors[r])]
                        [static_cast<size_t>(a)]
                            .row(s)
                            .transpose());
  return context;
}

}  // namespace

std::pair<double, double> polytope_coordinate_range(const TransitionDataset& data,
                                                    const Vector& drift,
                                                    const ChainEstimate& estimate, Index s,
                                                    Index a, Index s_next) {
  if (estimate.kernels.empty())
    throw InvalidInputError("polytope range: estimate must exist");
  const Index S = data.n_states;
  if (s < 0 || s >= S || s_next < 0 || s_next >= S || a < 0 || a >= data.n_actions)
    throw InvalidInputError("polytope range: indices out of range");

  const auto groups = group_observations(data);
  if (groups[static_cast<size_t>(s * data.n_actions + a)].empty())
    return S == 1 ? std::pair<double, double>{1.0, 1.0}
                  : std::pair<double, double>{0.0, 1.0};

  const ChainContext context = build_range_context(data, drift, estimate, s, a);
  return coordinate_range_for_chain(context.chain, context.pinned, S, s_next);
}

UncertaintyIntervals polytope_ranges(const TransitionDataset& data, const Vector& drift,
                                     const ChainEstimate& estimate) {
  if (estimate.kernels.empty())
    throw InvalidInputError("polytope ranges: estimate must exist");
  const Index S = data.n_states;
  const Index A = data.n_actions;

  UncertaintyIntervals intervals;
  intervals.base_time = estimate.update_times.back();
  intervals.offset = 0;
  intervals.lo.assign(static_cast<size_t>(A), Matrix::Zero(S, S));
  intervals.hi.assign(static_cast<size_t>(A), Matrix::Ones(S, S));
  intervals.diameter = Matrix::Zero(S, A);

  const auto groups = group_observations(data);
  for (Index s = 0; s < S; ++s) {
    for (Index a = 0; a < A; ++a) {
      if (groups[static_cast<size_t>(s * A + a)].empty()) {
        if (S == 1) {
          intervals.lo[static_cast<size_t>(a)](s, 0) = 1.0;
          intervals.diameter(s, a) = 0.0;
        } else {
          intervals.diameter(s, a) = 1.0;  // min(1, S/2) with unit ranges
        }
        continue;
      }
      const ChainContext context = build_range_context(data, drift, estimate, s, a);
      for (Index j = 0; j < S; ++j) {
        const auto [lo, hi] = coordinate_range_for_chain(context.chain, context.pinned, S, j);
        intervals.lo[static_cast<size_t>(a)](s, j) = lo;
        intervals.hi[static_cast<size_t>(a)](s, j) = hi;
      }
      intervals.diameter(s, a) =
          uncertainty_diameter(intervals.lo[static_cast<size_t>(a)].row(s).transpose(),
                               intervals.hi[static_cast<size_t>(a)].row(s).transpose());
    }
  }
  return intervals;
}

double uncertainty_diameter(const Vector& lo, const Vector& hi) {
  if (lo.size() != hi.size())
    throw InvalidInputError("uncertainty_diameter: mismatched ranges");
  return std::min(1.0, 0.5 * (hi - lo).sum());
}

UncertaintyIntervals forecast_uncertainty(const UncertaintyIntervals& base,
                                          const Vector& drift, Index h, Index horizon) {
  if (h < 0) throw InvalidInputError("forecast: lookahead must be nonnegative");
  const Index start = base.base_time + base.offset;
  if (start + h > horizon - 1)
    throw InvalidInputError("forecast: target time beyond horizon");

  double widen = 0.0;
  for (Index t = start; t < start + h; ++t) widen += drift(t);

  UncertaintyIntervals out = base;
  out.offset = base.offset + h;
  const auto A = static_cast<Index>(base.lo.size());
  const Index S = base.diameter.rows();
  for (Index a = 0; a < A; ++a) {
    out.lo[static_cast<size_t>(a)] =
        (base.lo[static_cast<size_t>(a)].array() - widen).max(0.0);
    out.hi[static_cast<size_t>(a)] =
        (base.hi[static_cast<size_t>(a)].array() + widen).min(1.0);
  }
  for (Index s = 0; s < S; ++s)
    for (Index a = 0; a < A; ++a)
      out.diameter(s, a) =
          uncertainty_diameter(out.lo[static_cast<size_t>(a)].row(s).transpose(),
                               out.hi[static_cast<size_t>(a)].row(s).transpose());
  return out;
}

}  // namespace tvmdp
