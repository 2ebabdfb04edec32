#include "tvmdp/simplex_lp.hpp"

#include "tvmdp/errors.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace tvmdp {

namespace {

constexpr double kReducedCostTol = 1e-10;
constexpr double kPivotTol = 1e-9;

// Dense tableau simplex. Rows 0..m-1 hold constraints, row m holds the
// (reduced) objective; column n_total holds the right-hand side.
struct Tableau {
  Matrix body;               // (m+1) x (n_total+1)
  std::vector<Index> basis;  // basic column per row
  Index m = 0;
  Index n_total = 0;

  void pivot(Index row, Index col) {
    body.row(row) /= body(row, col);
    for (Index r = 0; r <= m; ++r) {
      if (r == row) continue;
      const double factor = body(r, col);
      if (factor != 0.0) body.row(r) -= factor * body.row(row);
    }
    basis[static_cast<size_t>(row)] = col;
  }

  // Bland's rule: smallest eligible entering column among `allowed`,
  // smallest ratio then smallest basis index leaving. Returns false when
  // no entering column remains (optimal for the current cost row).
  bool iterate(const std::vector<bool>& allowed, Index max_iters) {
    for (Index iter = 0; iter < max_iters; ++iter) {
      Index entering = -1;
      for (Index j = 0; j < n_total; ++j) {
        if (!allowed[static_cast<size_t>(j)]) continue;
        if (body(m, j) < -kReducedCostTol) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return true;

      Index leaving = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Index r = 0; r < m; ++r) {
        const double coeff = body(r, entering);
        if (coeff <= kPivotTol) continue;
        const double ratio = body(r, n_total) / coeff;
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && leaving >= 0 &&
             basis[static_cast<size_t>(r)] < basis[static_cast<size_t>(leaving)])) {
          best_ratio = ratio;
          leaving = r;
        }
      }
      if (leaving < 0) return false;  // unbounded direction
      pivot(leaving, entering);
    }
    throw InternalConsistencyError("simplex: iteration guard exceeded");
  }
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp) {
  const Index n = lp.c.size();
  const Index m_eq = lp.A_eq.rows();
  const Index m_ub = lp.A_ub.rows();
  const Index m = m_eq + m_ub;
  const Index n_slack = m_ub;
  const Index n_struct = n + n_slack;
  const Index n_total = n_struct + m;  // artificials appended per row

  Tableau tab;
  tab.m = m;
  tab.n_total = n_total;
  tab.body = Matrix::Zero(m + 1, n_total + 1);
  tab.basis.assign(static_cast<size_t>(m), -1);

  for (Index r = 0; r < m_eq; ++r) {
    tab.body.block(r, 0, 1, n) = lp.A_eq.row(r);
    tab.body(r, n_total) = lp.b_eq(r);
  }
  for (Index r = 0; r < m_ub; ++r) {
    const Index row = m_eq + r;
    tab.body.block(row, 0, 1, n) = lp.A_ub.row(r);
    tab.body(row, n + r) = 1.0;  // slack
    tab.body(row, n_total) = lp.b_ub(r);
  }
  // Standard form needs b >= 0.
  for (Index r = 0; r < m; ++r)
    if (tab.body(r, n_total) < 0.0) tab.body.row(r) *= -1.0;
  for (Index r = 0; r < m; ++r) {
    tab.body(r, n_struct + r) = 1.0;
    tab.basis[static_cast<size_t>(r)] = n_struct + r;
  }

  const Index max_iters = 2000 + 200 * (m + n_total);

  // Phase 1: minimize the sum of artificials.
  for (Index r = 0; r < m; ++r) tab.body.row(m) -= tab.body.row(r);
  tab.body.block(m, n_struct, 1, m).setZero();
  std::vector<bool> allowed(static_cast<size_t>(n_total), true);
  if (!tab.iterate(allowed, max_iters))
    throw InternalConsistencyError("simplex: phase 1 reported unbounded");
  if (-tab.body(m, n_total) > 1e-8) return {LpStatus::Infeasible, Vector(), 0.0};

  // Pivot leftover artificials out of the basis where possible; rows with
  // no structural pivot are redundant and the artificial stays at zero.
  for (Index r = 0; r < m; ++r) {
    if (tab.basis[static_cast<size_t>(r)] < n_struct) continue;
    for (Index j = 0; j < n_struct; ++j) {
      if (std::abs(tab.body(r, j)) > kPivotTol) {
        tab.pivot(r, j);
        break;
      }
    }
  }
  for (Index j = n_struct; j < n_total; ++j) allowed[static_cast<size_t>(j)] = false;

  // Phase 2: original costs, reduced against the current basis.
  tab.body.row(m).setZero();
  tab.body.block(m, 0, 1, n) = lp.c.transpose();
  for (Index r = 0; r < m; ++r) {
    const Index b = tab.basis[static_cast<size_t>(r)];
    const double cost = tab.body(m, b);
    if (cost != 0.0) tab.body.row(m) -= cost * tab.body.row(r);
  }
  if (!tab.iterate(allowed, max_iters)) return {LpStatus::Unbounded, Vector(), 0.0};

  LpResult result;
  result.status = LpStatus::Optimal;
  result.x = Vector::Zero(n);
  for (Index r = 0; r < m; ++r) {
    const Index b = tab.basis[static_cast<size_t>(r)];
    if (b < n) result.x(b) = tab.body(r, n_total);
  }
  result.value = lp.c.dot(result.x);
  return result;
}

}  // namespace tvmdp
