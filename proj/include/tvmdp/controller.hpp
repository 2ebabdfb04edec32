#pragma once

#include "tvmdp/estimator.hpp"
#include "tvmdp/oracle.hpp"
#include "tvmdp/planner.hpp"
#include "tvmdp/types.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace tvmdp {

struct AgentConfig {
  double beta = 0.0;
  Index h_bar = 1;
  double cmle_tol = 1e-10;
  Index cmle_max_iters = 50000;
  HorizonRule horizon_rule = HorizonRule::FullTail;
};

// Everything the agent itself carries between steps: the update counter, the
// most recently observed state (its acting argument during skips), the policy
// currently in force, the growing dataset, and the last plan.
struct AgentState {
  Index update_index = 0;
  Index last_observed = 0;
  MarkovPolicy active_policy;
  TransitionDataset dataset;
  PlanArtifact last_plan;
};

struct TrajectoryStep {
  Index t = 0;
  bool is_update = false;
  Index state = 0;  // true state s_t
  Index action = 0;
  double reward = 0.0;
};

struct Trajectory {
  std::uint64_t seed = 0;
  Index start_state = 0;
  std::vector<TrajectoryStep> steps;
};

// Everything produced by one run of the skip-update loop: the sampled
// trajectory plus the per-update estimation and planning artifacts needed to
// re-evaluate the executed policies exactly.
struct EpisodeResult {
  Trajectory trajectory;
  MarkovPolicy initial_policy;  // in force when acting at tau_0
  std::vector<PlanArtifact> plans;
  std::vector<ChainEstimate> estimates;
  std::vector<std::vector<UncertaintyIntervals>> forecasts;  // [k][h], h < H_k
  TransitionDataset dataset;
};

struct EpisodeError : std::runtime_error {
  Trajectory partial;
  EpisodeError(const std::string& msg, Trajectory trajectory)
      : std::runtime_error(msg), partial(std::move(trajectory)) {}
};

// Runs the skip-update loop: at update times the agent observes the state,
// acts with the policy currently in force, observes the next state, appends
// the transition, re-estimates, forecasts, replans and adopts the new first
// policy from the next step on; at skip times it acts with the stale policy
// evaluated at the stale state and nothing else changes. All randomness
// (kernel and policy sampling) comes from the seeded generator.
EpisodeResult run_episode(const TvMdp& M, const UpdateSchedule& schedule,
                          const AgentConfig& config, std::uint64_t seed,
                          Index start_state = 0);

// The policy map actually applied at each t. At update times the map reads
// the true current state; at skip times it reads the stale state.
struct ExecutedPolicies {
  std::vector<MarkovPolicy> policy;    // length T
  std::vector<bool> reads_true_state;  // length T
};

ExecutedPolicies executed_policies(const UpdateSchedule& schedule,
                                   const std::vector<PlanArtifact>& plans,
                                   const MarkovPolicy& initial_policy, Index horizon);

// Exact evaluation of a fixed executed-policy sequence by propagating the
// joint law mu_t(s, s_hat) of (true state, stale state) from every start
// state. At update times mass re-couples onto the diagonal after the step
// (the fresh observation becomes the stale state); at skip times the stale
// coordinate is frozen.
struct ExactEvaluation {
  Vector j_alg;                             // per start state
  Matrix expected_reward;                   // (s0, t)
  std::vector<std::vector<Matrix>> joints;  // [s0][t](s, s_hat), before acting at t
  std::vector<std::vector<MarkovPolicy>> effective;  // [s0][t]: Pr(a_t = a | s_t = s)
};

ExactEvaluation exact_evaluate(const TvMdp& M, const UpdateSchedule& schedule,
                               const ExecutedPolicies& exec);

struct RegretResult {
  double dr = 0.0;       // max over start states
  Index argmax_s0 = 0;
  Vector gap;            // J*(s0) - J_alg(s0) per start state
};

// DR(T) = max_s0 ( J*_T(s0) - J^alg_T(s0) ).
RegretResult dynamic_regret(const TvMdp& M, const ValueTables& tables,
                            const ExactEvaluation& evaluation);

// One sampled return of the fixed executed policies from start_state.
double rollout_return(const TvMdp& M, const UpdateSchedule& schedule,
                      const ExecutedPolicies& exec, Index start_state,
                      std::mt19937_64& rng);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  Index n_rollouts = 0;
};

// Seeded Monte-Carlo mean return of the fixed executed policies.
McEstimate mc_evaluate(const TvMdp& M, const UpdateSchedule& schedule,
                       const ExecutedPolicies& exec, Index start_state, Index n_rollouts,
                       std::uint64_t seed);

// Samples an index from a probability row using one uniform draw.
Index sample_row(const Eigen::Ref<const Eigen::RowVectorXd>& row, std::mt19937_64& rng);

}  // namespace tvmdp
