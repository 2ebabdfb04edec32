#include "tvmdp/controller.hpp"

#include "tvmdp/errors.hpp"
#include "tvmdp/validate.hpp"

#include <cmath>

namespace tvmdp {

Index sample_row(const Eigen::Ref<const Eigen::RowVectorXd>& row, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng);
  double cumulative = 0.0;
  for (Index i = 0; i < row.size(); ++i) {
    cumulative += row(i);
    if (u < cumulative) return i;
  }
  return row.size() - 1;  // guards against row sums a hair below 1
}

EpisodeResult run_episode(const TvMdp& M, const UpdateSchedule& schedule,
                          const AgentConfig& config, std::uint64_t seed,
                          Index start_state) {
  require_valid(M);
  {
    const ValidationReport report = validate_schedule(schedule, M.horizon);
    if (!report.ok()) throw InvalidInputError(report.issues.front().message);
  }
  if (start_state < 0 || start_state >= M.n_states)
    throw InvalidInputError("run_episode: start state out of range");

  const Index T = M.horizon;
  std::mt19937_64 rng(seed);

  EpisodeResult result;
  result.trajectory.seed = seed;
  result.trajectory.start_state = start_state;
  result.initial_policy = constant_policy(M.n_states, M.n_actions, 0);

  AgentState agent;
  agent.update_index = 0;
  agent.last_observed = start_state;
  agent.active_policy = result.initial_policy;
  agent.dataset.n_states = M.n_states;
  agent.dataset.n_actions = M.n_actions;
  Index state = start_state;

  for (Index t = 0; t < T; ++t) {
    const bool update = is_update_time(schedule, t);
    TrajectoryStep step;
    step.t = t;
    step.is_update = update;
    step.state = state;

    if (update) {
      // Observe s_t, act with the policy currently in force, observe s_{t+1}.
      const Index action = sample_row(agent.active_policy.row(state), rng);
      const Index next_state = sample_row(
          M.kernels[static_cast<size_t>(t)][static_cast<size_t>(action)].row(state), rng);
      step.action = action;
      step.reward = M.rewards[static_cast<size_t>(t)](state, action);
      result.trajectory.steps.push_back(step);

      agent.dataset.triples.push_back({t, state, action, next_state});

      CmleOptions options;
      options.tol = config.cmle_tol;
      options.max_iters = config.cmle_max_iters;
      if (!result.estimates.empty()) {
        // Warm start: previous chain extended by repeating its last kernel.
        options.init = result.estimates.back().kernels;
        options.init.push_back(options.init.back());
      }
      ChainEstimate estimate;
      try {
        estimate = solve_cmle(agent.dataset, M.drift, options);
      } catch (const CmleConvergenceError& err) {
        throw EpisodeError(std::string("estimator failed at t=") + std::to_string(t) +
                               ": " + err.what(),
                           result.trajectory);
      }

      const UncertaintyIntervals intervals =
          polytope_ranges(agent.dataset, M.drift, estimate);
      const Index H = planning_horizon(config.horizon_rule, config.h_bar, T, t);
      if (H < 1)
        throw EpisodeError("planning horizon is zero at t=" + std::to_string(t),
                           result.trajectory);
      std::vector<UncertaintyIntervals> forecasts;
      forecasts.reserve(static_cast<size_t>(H));
      for (Index h = 0; h < H; ++h)
        forecasts.push_back(forecast_uncertainty(intervals, M.drift, h, T));

      const std::vector<Matrix> augmented =
          build_augmented_rewards(M.rewards, forecasts, t, H, config.beta);
      PlanArtifact artifact = plan(estimate.kernels.back(), augmented, t);

      agent.active_policy = first_policy(artifact);
      agent.last_plan = artifact;
      agent.last_observed = next_state;
      agent.update_index += 1;
      state = next_state;

      result.estimates.push_back(std::move(estimate));
      result.forecasts.push_back(std::move(forecasts));
      result.plans.push_back(std::move(artifact));
    } else {
      // Stale step: act on the last observed state, learn nothing.
      const Index action = sample_row(agent.active_policy.row(agent.last_observed), rng);
      const Index next_state = sample_row(
          M.kernels[static_cast<size_t>(t)][static_cast<size_t>(action)].row(state), rng);
      step.action = action;
      step.reward = M.rewards[static_cast<size_t>(t)](state, action);
      result.trajectory.steps.push_back(step);
      state = next_state;
    }
  }
  result.dataset = std::move(agent.dataset);
  return result;
}

ExecutedPolicies executed_policies(const UpdateSchedule& schedule,
                                   const std::vector<PlanArtifact>& plans,
                                   const MarkovPolicy& initial_policy, Index horizon) {
  ExecutedPolicies exec;
  exec.policy.reserve(static_cast<size_t>(horizon));
  exec.reads_true_state.reserve(static_cast<size_t>(horizon));
  for (Index t = 0; t < horizon; ++t) {
    const bool update = is_update_time(schedule, t);
    const Index k = last_update_index(schedule, t);
    if (update) {
      // The policy in force at tau_k is the one planned at tau_{k-1}.
      exec.policy.push_back(k == 0 ? initial_policy
                                   : first_policy(plans[static_cast<size_t>(k) - 1]));
    } else {
      exec.policy.push_back(first_policy(plans[static_cast<size_t>(k)]));
    }
    exec.reads_true_state.push_back(update);
  }
  return exec;
}

ExactEvaluation exact_evaluate(const TvMdp& M, const UpdateSchedule& schedule,
                               const ExecutedPolicies& exec) {
  require_valid(M);
  const Index S = M.n_states;
  const Index A = M.n_actions;
  const Index T = M.horizon;
  if (static_cast<Index>(exec.policy.size()) != T)
    throw InvalidInputError("exact_evaluate: need one executed policy per step");

  for (Index t = 0; t < T; ++t)
    if (exec.reads_true_state[static_cast<size_t>(t)] != is_update_time(schedule, t))
      throw InvalidInputError(
          "exact_evaluate: executed policies disagree with the schedule");

  ExactEvaluation evaluation;
  evaluation.j_alg = Vector::Zero(S);
  evaluation.expected_reward = Matrix::Zero(S, T);
  evaluation.joints.assign(static_cast<size_t>(S), {});
  evaluation.effective.assign(static_cast<size_t>(S), {});

  for (Index s0 = 0; s0 < S; ++s0) {
    Matrix mu = Matrix::Zero(S, S);  // mu(s, s_hat)
    mu(s0, s0) = 1.0;
    auto& joints = evaluation.joints[static_cast<size_t>(s0)];
    auto& effective = evaluation.effective[static_cast<size_t>(s0)];
    joints.reserve(static_cast<size_t>(T));
    effective.reserve(static_cast<size_t>(T));

    for (Index t = 0; t < T; ++t) {
      const double mass = mu.sum();
      if (std::abs(mass - 1.0) > 1e-9)
        throw InternalConsistencyError("exact_evaluate: joint distribution lost mass");
      joints.push_back(mu);

      const MarkovPolicy& policy = exec.policy[static_cast<size_t>(t)];
      const ControlledKernel& kernel = M.kernels[static_cast<size_t>(t)];
      const Matrix& reward = M.rewards[static_cast<size_t>(t)];
      Matrix next = Matrix::Zero(S, S);
      double step_reward = 0.0;

      if (exec.reads_true_state[static_cast<size_t>(t)]) {
        // Update step: the action depends on the true state; afterwards the
        // stale state equals the fresh observation s_{t+1}.
        const Vector true_marginal = mu.rowwise().sum();
        effective.push_back(policy);
        for (Index s = 0; s < S; ++s) {
          const double p_s = true_marginal(s);
          if (p_s == 0.0) continue;
          for (Index a = 0; a < A; ++a) {
            const double p_sa = p_s * policy(s, a);
            if (p_sa == 0.0) continue;
            step_reward += p_sa * reward(s, a);
            for (Index sn = 0; sn < S; ++sn)
              next(sn, sn) += p_sa * kernel[static_cast<size_t>(a)](s, sn);
          }
        }
      } else {
        // Skip step: the action depends on the stale state, which is frozen.
        MarkovPolicy marginal_policy = MarkovPolicy::Zero(S, A);
        const Vector true_marginal = mu.rowwise().sum();
        for (Index s = 0; s < S; ++s) {
          if (true_marginal(s) == 0.0) {
            marginal_policy.row(s) = policy.row(s);  // greedy-at-s fallback
            continue;
          }
          for (Index sh = 0; sh < S; ++sh)
            marginal_policy.row(s) += mu(s, sh) * policy.row(sh);
          marginal_policy.row(s) /= true_marginal(s);
        }
        effective.push_back(marginal_policy);

        for (Index sh = 0; sh < S; ++sh) {
          for (Index a = 0; a < A; ++a) {
            const double p_a = policy(sh, a);
            if (p_a == 0.0) continue;
            for (Index s = 0; s < S; ++s) {
              const double p = mu(s, sh) * p_a;
              if (p == 0.0) continue;
              step_reward += p * reward(s, a);
              for (Index sn = 0; sn < S; ++sn)
                next(sn, sh) += p * kernel[static_cast<size_t>(a)](s, sn);
            }
          }
        }
      }

      evaluation.expected_reward(s0, t) = step_reward;
      evaluation.j_alg(s0) += step_reward;
      mu = next;
    }
  }
  return evaluation;
}

RegretResult dynamic_regret(const TvMdp& M, const ValueTables& tables,
                            const ExactEvaluation& evaluation) {
  RegretResult result;
  result.gap = tables.V.front() - evaluation.j_alg;
  result.dr = result.gap.maxCoeff(&result.argmax_s0);
  (void)M;
  return result;
}

double rollout_return(const TvMdp& M, const UpdateSchedule& schedule,
                      const ExecutedPolicies& exec, Index start_state,
                      std::mt19937_64& rng) {
  Index state = start_state;
  Index stale_state = start_state;
  double total = 0.0;
  for (Index t = 0; t < M.horizon; ++t) {
    const bool update = is_update_time(schedule, t);
    const MarkovPolicy& policy = exec.policy[static_cast<size_t>(t)];
    const Index argument = update ? state : stale_state;
    const Index action = sample_row(policy.row(argument), rng);
    total += M.rewards[static_cast<size_t>(t)](state, action);
    const Index next_state = sample_row(
        M.kernels[static_cast<size_t>(t)][static_cast<size_t>(action)].row(state), rng);
    if (update) stale_state = next_state;
    state = next_state;
  }
  return total;
}

McEstimate mc_evaluate(const TvMdp& M, const UpdateSchedule& schedule,
                       const ExecutedPolicies& exec, Index start_state, Index n_rollouts,
                       std::uint64_t seed) {
  if (n_rollouts < 1) throw InvalidInputError("mc_evaluate: need at least one rollout");
  std::mt19937_64 rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (Index i = 0; i < n_rollouts; ++i) {
    const double value = rollout_return(M, schedule, exec, start_state, rng);
    sum += value;
    sum_sq += value * value;
  }
  McEstimate estimate;
  estimate.n_rollouts = n_rollouts;
  estimate.mean = sum / static_cast<double>(n_rollouts);
  const double variance =
      std::max(0.0, sum_sq / static_cast<double>(n_rollouts) - estimate.mean * estimate.mean);
  estimate.std_error = std::sqrt(variance / static_cast<double>(n_rollouts));
  return estimate;
}

}  // namespace tvmdp
