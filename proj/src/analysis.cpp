#include "tvmdp/analysis.hpp"

#include "tvmdp/distance.hpp"
#include "tvmdp/errors.hpp"

#include <algorithm>
#include <cmath>

namespace tvmdp {

namespace {

// alpha^e with the convention 0^0 = 1; exponents are clamped below at 0.
double contraction_power(double alpha, Index exponent) {
  if (exponent <= 0) return 1.0;
  return std::pow(alpha, static_cast<double>(exponent));
}

}  // namespace

RegretDecomposition per_step_regret(const TvMdp& M, const ValueTables& tables,
                                    const UpdateSchedule& schedule,
                                    const ExactEvaluation& evaluation) {
  const Index S = M.n_states;
  const Index T = M.horizon;

  RegretDecomposition decomposition;
  decomposition.delta = Matrix::Zero(S, T);
  decomposition.update_sum = Vector::Zero(S);
  decomposition.skip_sum = Vector::Zero(S);

  for (Index s0 = 0; s0 < S; ++s0) {
    for (Index t = 0; t < T; ++t) {
      const Matrix& mu = evaluation.joints[static_cast<size_t>(s0)][static_cast<size_t>(t)];
      const MarkovPolicy& effective =
          evaluation.effective[static_cast<size_t>(s0)][static_cast<size_t>(t)];
      const Matrix& Q = tables.Q[static_cast<size_t>(t)];
      const Vector& V = tables.V[static_cast<size_t>(t)];
      const Vector marginal = mu.rowwise().sum();
      double delta = 0.0;
      for (Index s = 0; s < S; ++s) {
        if (marginal(s) == 0.0) continue;
        const double executed_value = effective.row(s).dot(Q.row(s));
        delta += marginal(s) * (V(s) - executed_value);
      }
      decomposition.delta(s0, t) = delta;
      if (is_update_time(schedule, t))
        decomposition.update_sum(s0) += delta;
      else
        decomposition.skip_sum(s0) += delta;
    }
  }
  return decomposition;
}

ModelErrorTerms model_error_terms(const TvMdp& M, const ControlledKernel& kernel_estimate,
                                  const std::vector<UncertaintyIntervals>& forecasts,
                                  double beta, Index t) {
  const auto H = static_cast<Index>(forecasts.size());
  ModelErrorTerms terms;
  terms.eps_hat = Vector::Zero(H);
  terms.delta_hat = Vector::Zero(H);
  terms.delta_hat_span = Vector::Zero(H);
  for (Index i = 0; i < H; ++i) {
    const Index time = std::min(t + i, M.horizon - 1);
    terms.eps_hat(i) = max_row_tv(M.kernels[static_cast<size_t>(time)], kernel_estimate);
    const Matrix& u = forecasts[static_cast<size_t>(i)].diameter;
    terms.delta_hat(i) = beta * u.maxCoeff();
    double worst_span = 0.0;
    for (Index s = 0; s < u.rows(); ++s)
      worst_span = std::max(worst_span, span(u.row(s)));
    terms.delta_hat_span(i) = worst_span;
  }
  return terms;
}

VariationTerms variation_terms(const TvMdp& M, Index tau, Index t) {
  if (tau < 0 || t < tau || t >= M.horizon)
    throw InvalidInputError("variation_terms: need 0 <= tau <= t <= T-1");
  VariationTerms terms;
  terms.eps_bar = max_row_tv(M.kernels[static_cast<size_t>(t)],
                             M.kernels[static_cast<size_t>(tau)]);
  double worst = 0.0;
  const Matrix diff = M.rewards[static_cast<size_t>(t)] - M.rewards[static_cast<size_t>(tau)];
  for (Index s = 0; s < diff.rows(); ++s) worst = std::max(worst, span(diff.row(s)));
  terms.delta_bar = worst;
  return terms;
}

BoundBreakdown theorem_bound(const TvMdp& M, const UpdateSchedule& schedule,
                             const MixingCertificate& mixing,
                             const std::vector<PlanArtifact>& plans,
                             const std::vector<ChainEstimate>& estimates,
                             const std::vector<std::vector<UncertaintyIntervals>>& forecasts,
                             const ValueTables& tables, double beta) {
  if (!mixing.assumption_holds)
    throw AssumptionViolatedError("theorem_bound: eta = 0, the bound is vacuous");
  if (plans.size() != schedule.times.size() || estimates.size() != schedule.times.size() ||
      forecasts.size() != schedule.times.size())
    throw InvalidInputError("theorem_bound: need one plan/estimate/forecast per update");

  const Index T = M.horizon;
  const Index m = mixing.m;
  const double alpha = mixing.alpha;
  const double v_tilde = span_bound(tables);
  const auto n_updates = static_cast<Index>(schedule.times.size());

  BoundBreakdown breakdown;
  breakdown.m = m;
  breakdown.eta = mixing.eta;
  breakdown.alpha = alpha;
  breakdown.v_tilde = v_tilde;
  breakdown.w_tilde = Vector::Zero(n_updates);
  breakdown.delta_hat_span = Vector::Zero(n_updates);

  // Per-update constituents, computed once and reused for every t in the
  // update's interval.
  std::vector<ModelErrorTerms> model_errors(static_cast<size_t>(n_updates));
  Vector e_hat_total = Vector::Zero(n_updates);
  for (Index k = 0; k < n_updates; ++k) {
    const Index tau = schedule.times[static_cast<size_t>(k)];
    const PlanArtifact& artifact = plans[static_cast<size_t>(k)];
    breakdown.w_tilde(k) = artifact.span_bound;
    model_errors[static_cast<size_t>(k)] =
        model_error_terms(M, estimates[static_cast<size_t>(k)].kernels.back(),
                          forecasts[static_cast<size_t>(k)], beta, tau);

    const ModelErrorTerms& terms = model_errors[static_cast<size_t>(k)];
    breakdown.delta_hat_span(k) = terms.delta_hat_span.maxCoeff();
    const Index H = artifact.plan_horizon;
    const Index blocks = (H - 1) / m;
    const double w_tilde = artifact.span_bound;
    auto e_hat = [&](Index j) {
      return terms.eps_hat(j) * w_tilde + terms.delta_hat(j);
    };
    double total = terms.delta_hat(0) + terms.eps_hat(0) * v_tilde;
    for (Index block = 0; block < blocks; ++block)
      for (Index i = 1; i <= m; ++i)
        total += 2.0 * contraction_power(alpha, block) * e_hat(block * m + i);
    for (Index i = 1; i <= H - blocks * m - 1; ++i)
      total += 2.0 * contraction_power(alpha, blocks) * e_hat(blocks * m + i);
    e_hat_total(k) = total;
  }

  auto e_bar = [&](Index tau, Index offset) {
    const VariationTerms terms = variation_terms(M, tau, std::min(tau + offset, T - 1));
    return terms.eps_bar * v_tilde + terms.delta_bar;
  };

  breakdown.rows.reserve(static_cast<size_t>(T));
  for (Index t = 0; t < T; ++t) {
    const Index k = last_update_index(schedule, t);
    const Index tau = schedule.times[static_cast<size_t>(k)];
    const Index H = plans[static_cast<size_t>(k)].plan_horizon;

    BoundRow row;
    row.t = t;
    row.is_update = is_update_time(schedule, t);
    row.update_contraction =
        contraction_power(alpha, std::max<Index>(0, (H - 1) / m)) * v_tilde;
    row.update_error = e_hat_total(k);

    if (!row.is_update) {
      const Index blocks = (T - t) / m;
      row.skip_contraction = contraction_power(alpha, blocks) * v_tilde;
      double total = e_bar(tau, t - tau);
      for (Index block = 0; block < blocks; ++block)
        for (Index i = 0; i <= m - 1; ++i)
          total += 2.0 * contraction_power(alpha, block) * e_bar(tau, block * m + i);
      for (Index i = 0; i <= T - t - blocks * m; ++i)
        total += 2.0 * contraction_power(alpha, blocks) * e_bar(tau, blocks * m + i);
      row.skip_error = total;
    }

    row.row_total =
        row.update_contraction + row.update_error + row.skip_contraction + row.skip_error;
    breakdown.update_total += row.update_contraction + row.update_error;
    breakdown.skip_total += row.skip_contraction + row.skip_error;
    breakdown.rows.push_back(row);
  }
  breakdown.total = breakdown.update_total + breakdown.skip_total;
  return breakdown;
}

MultiStageCheck lemma_a1_check(const TvMdp& M, const TvMdp& M_bar, Index m, double eta,
                               Index t, Index N) {
  if (M.n_states != M_bar.n_states || M.n_actions != M_bar.n_actions ||
      M.horizon != M_bar.horizon)
    throw InvalidInputError("lemma_a1_check: the two sequences must share (S, A, T)");
  if (m < 1 || N < 1 || t < 0 || t + N > M.horizon)
    throw InvalidInputError("lemma_a1_check: need m >= 1, N >= 1 and t + N <= T");

  const Index T = M.horizon;
  const ValueTables tables = solve_oracle(M);
  const ValueTables tables_bar = solve_oracle(M_bar);
  const double alpha = 1.0 - eta;

  MultiStageCheck check;
  check.pair_eta = 1.0;
  for (Index w = 0; w + m <= T; ++w)
    check.pair_eta = std::min(
        check.pair_eta, overlap_two_chains(M.kernels, tables.greedy, M_bar.kernels,
                                           tables_bar.greedy, w, m));
  check.eta_verified = check.pair_eta >= eta - 1e-12;

  auto eps_bar = [&](Index k) {
    const Index idx = std::min(k, T - 1);
    return max_row_tv(M.kernels[static_cast<size_t>(idx)],
                      M_bar.kernels[static_cast<size_t>(idx)]);
  };
  auto delta_bar = [&](Index k) {
    const Index idx = std::min(k, T - 1);
    return (M.rewards[static_cast<size_t>(idx)] - M_bar.rewards[static_cast<size_t>(idx)])
        .cwiseAbs()
        .maxCoeff();
  };
  auto span_v_bar = [&](Index k) {
    return span(tables_bar.V[static_cast<size_t>(std::min(k, T))]);
  };

  check.lhs = span(tables.V[static_cast<size_t>(t)] - tables_bar.V[static_cast<size_t>(t)]);

  const Index blocks = N / m;
  double rhs = contraction_power(alpha, blocks) *
               span(tables.V[static_cast<size_t>(t + N)] -
                    tables_bar.V[static_cast<size_t>(t + N)]);
  for (Index i = 1; i <= N - blocks * m - 1; ++i)
    rhs += 2.0 * contraction_power(alpha, blocks) *
           (eps_bar(t + blocks * m + i) * span_v_bar(t + blocks * m + 1) +
            delta_bar(t + blocks * m + i));
  for (Index block = 0; block < blocks; ++block)
    for (Index i = 1; i <= m; ++i)
      rhs += 2.0 * contraction_power(alpha, block) *
             (eps_bar(t + block * m + i) * span_v_bar(t + (block + 1) * m + 1) +
              delta_bar(t + block * m + i));

  check.rhs = rhs;
  check.holds = check.lhs <= check.rhs + 1e-8;
  return check;
}

PerStepBoundCheck lemma_b1_check(const ValueTables& tables, const PlanArtifact& artifact,
                                 const ExactEvaluation& evaluation,
                                 const RegretDecomposition& decomposition,
                                 const BoundBreakdown& breakdown, Index t, Index s0) {
  if (artifact.update_time != t)
    throw InvalidInputError("lemma_b1_check: artifact does not belong to time t");
  const Matrix& mu = evaluation.joints[static_cast<size_t>(s0)][static_cast<size_t>(t)];
  const Vector marginal = mu.rowwise().sum();
  const Matrix& Q = tables.Q[static_cast<size_t>(t)];
  const Vector& V = tables.V[static_cast<size_t>(t)];
  const Eigen::VectorXi planned = greedy_actions(artifact.Z.front());

  PerStepBoundCheck check;
  for (Index s = 0; s < marginal.size(); ++s) {
    if (marginal(s) == 0.0) continue;
    check.gap_planned += marginal(s) * (V(s) - Q(s, planned(s)));
  }
  check.gap_executed = decomposition.delta(s0, t);
  const BoundRow& row = breakdown.rows[static_cast<size_t>(t)];
  check.rhs = row.update_contraction + row.update_error;
  check.holds = check.gap_planned <= check.rhs + 1e-8;
  return check;
}

SkipDiagnostics skip_diagnostics(const TvMdp& M, const ValueTables& tables,
                                 const RegretDecomposition& decomposition, Index tau,
                                 Index t) {
  if (tau < 0 || t < tau || t >= M.horizon)
    throw InvalidInputError("skip_diagnostics: need 0 <= tau <= t <= T-1");

  SkipDiagnostics diag;
  diag.inherited = decomposition.delta.col(tau).maxCoeff();

  const VariationTerms terms = variation_terms(M, tau, t);
  const double v_tilde = span_bound(tables);
  diag.time_mismatch = terms.delta_bar + terms.eps_bar * v_tilde +
                       span(tables.V[static_cast<size_t>(t)] -
                            tables.V[static_cast<size_t>(tau)]);

  double reward_span = 0.0;
  const Matrix& reward = M.rewards[static_cast<size_t>(t)];
  for (Index s = 0; s < M.n_states; ++s)
    reward_span = std::max(reward_span, span(reward.row(s)));
  double action_tv = 0.0;
  const ControlledKernel& kernel = M.kernels[static_cast<size_t>(t)];
  for (Index s = 0; s < M.n_states; ++s)
    for (Index a = 0; a < M.n_actions; ++a)
      for (Index a2 = a + 1; a2 < M.n_actions; ++a2)
        action_tv = std::max(action_tv, tv_distance(kernel[static_cast<size_t>(a)].row(s),
                                                    kernel[static_cast<size_t>(a2)].row(s)));
  diag.state_mismatch = reward_span + action_tv * v_tilde;
  return diag;
}

}  // namespace tvmdp
