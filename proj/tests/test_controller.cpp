#include "tvmdp/controller.hpp"

#include "tvmdp/errors.hpp"
#include "tvmdp/scenario.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

using namespace tvmdp;

namespace {

// Deterministic stationary instance on which "always action 0" is optimal
// from every state: action 0 stays and pays 1, action 1 switches and pays 0.
TvMdp stay_pay_instance(Index horizon) {
  TvMdp M;
  M.n_states = 2;
  M.n_actions = 2;
  M.horizon = horizon;
  ControlledKernel kernel(2, Matrix(2, 2));
  kernel[0] << 1, 0, 0, 1;  // stay
  kernel[1] << 0, 1, 1, 0;  // switch
  Matrix reward(2, 2);
  reward << 1, 0, 1, 0;
  for (Index t = 0; t < horizon; ++t) {
    M.kernels.push_back(kernel);
    M.rewards.push_back(reward);
  }
  M.drift = Vector::Zero(horizon);
  return M;
}

UpdateSchedule periodic(Index period, Index horizon) {
  return generate_schedule(PeriodicScheduleSpec{period}, horizon);
}

AgentConfig default_agent(Index h_bar = 8) {
  AgentConfig config;
  config.beta = 0.5;
  config.h_bar = h_bar;
  return config;
}

}  // namespace

TEST_CASE("run_episode: identical seeds give identical trajectories") {
  const TvMdp M = tvmdp::testing::random_instance(3, 2, 10, 0.1, 90);
  const UpdateSchedule schedule = periodic(2, 10);
  const EpisodeResult a = run_episode(M, schedule, default_agent(), 123, 1);
  const EpisodeResult b = run_episode(M, schedule, default_agent(), 123, 1);
  REQUIRE(a.trajectory.steps.size() == b.trajectory.steps.size());
  for (size_t i = 0; i < a.trajectory.steps.size(); ++i) {
    CHECK(a.trajectory.steps[i].state == b.trajectory.steps[i].state);
    CHECK(a.trajectory.steps[i].action == b.trajectory.steps[i].action);
    CHECK(a.trajectory.steps[i].reward == b.trajectory.steps[i].reward);
  }
}

TEST_CASE("run_episode: period-2 schedule collects data only at even steps") {
  const TvMdp M = tvmdp::testing::random_instance(2, 2, 9, 0.05, 91);
  const UpdateSchedule schedule = periodic(2, 9);
  const EpisodeResult result = run_episode(M, schedule, default_agent(), 7, 0);
  CHECK(result.dataset.triples.size() == 5);  // ceil(9 / 2)
  for (const auto& obs : result.dataset.triples) CHECK(obs.time % 2 == 0);
  for (const auto& step : result.trajectory.steps)
    CHECK(step.is_update == (step.t % 2 == 0));
}

TEST_CASE("run_episode: learned plan matches the oracle on a deterministic instance") {
  const TvMdp M = stay_pay_instance(8);
  const UpdateSchedule schedule = periodic(1, 8);
  const EpisodeResult result = run_episode(M, schedule, default_agent(8), 5, 1);
  // The oracle rollout from s0 = 1 pays 1 at every step via action 0.
  for (const auto& step : result.trajectory.steps) {
    CHECK(step.action == 0);
    CHECK(step.reward == doctest::Approx(1.0));
  }
}

TEST_CASE("run_episode: estimator iteration cap propagates with the partial trajectory") {
  const TvMdp M = tvmdp::testing::random_instance(2, 2, 6, 0.1, 92);
  const UpdateSchedule schedule = periodic(3, 6);
  AgentConfig config = default_agent();
  config.cmle_max_iters = 0;
  CHECK_THROWS_AS(run_episode(M, schedule, config, 11, 0), EpisodeError);
  try {
    run_episode(M, schedule, config, 11, 0);
  } catch (const EpisodeError& err) {
    CHECK(err.partial.steps.size() == 1);  // failed during the first update
  }
}

TEST_CASE("executed_policies: update steps read the previous plan, skips the current") {
  const TvMdp M = tvmdp::testing::random_instance(2, 2, 7, 0.1, 93);
  const UpdateSchedule schedule = periodic(3, 7);  // updates at 0, 3, 6
  const EpisodeResult episode = run_episode(M, schedule, default_agent(), 3, 0);
  const ExecutedPolicies exec =
      executed_policies(schedule, episode.plans, episode.initial_policy, 7);

  CHECK((exec.policy[0] - episode.initial_policy).cwiseAbs().maxCoeff() == 0.0);
  CHECK((exec.policy[3] - first_policy(episode.plans[0])).cwiseAbs().maxCoeff() == 0.0);
  CHECK((exec.policy[6] - first_policy(episode.plans[1])).cwiseAbs().maxCoeff() == 0.0);
  for (Index t : {1, 2})
    CHECK((exec.policy[static_cast<size_t>(t)] - first_policy(episode.plans[0]))
              .cwiseAbs()
              .maxCoeff() == 0.0);
  for (Index t : {4, 5})
    CHECK((exec.policy[static_cast<size_t>(t)] - first_policy(episode.plans[1]))
              .cwiseAbs()
              .maxCoeff() == 0.0);
  for (Index t = 0; t < 7; ++t)
    CHECK(exec.reads_true_state[static_cast<size_t>(t)] == is_update_time(schedule, t));
}

TEST_CASE("exact_evaluate: all-times schedule reduces to policy-evaluation DP") {
  const TvMdp M = tvmdp::testing::random_instance(3, 2, 8, 0.15, 94);
  const UpdateSchedule schedule = periodic(1, 8);
  const EpisodeResult episode = run_episode(M, schedule, default_agent(), 17, 2);
  const ExecutedPolicies exec =
      executed_policies(schedule, episode.plans, episode.initial_policy, 8);
  const ExactEvaluation evaluation = exact_evaluate(M, schedule, exec);
  const Vector dp = tvmdp::testing::policy_evaluation_dp(M, exec.policy);
  CHECK((evaluation.j_alg - dp).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("exact_evaluate: deterministic everything equals the single trajectory return") {
  const TvMdp M = stay_pay_instance(6);
  const UpdateSchedule schedule = periodic(3, 6);
  const EpisodeResult episode = run_episode(M, schedule, default_agent(), 19, 0);
  const ExecutedPolicies exec =
      executed_policies(schedule, episode.plans, episode.initial_policy, 6);
  const ExactEvaluation evaluation = exact_evaluate(M, schedule, exec);
  double realized = 0.0;
  for (const auto& step : episode.trajectory.steps) realized += step.reward;
  CHECK(evaluation.j_alg(0) == doctest::Approx(realized).epsilon(1e-12));
}

TEST_CASE("exact_evaluate: agrees with the tree-expansion oracle on skip schedules") {
  for (int trial = 0; trial < 6; ++trial) {
    const TvMdp M = tvmdp::testing::random_instance(2, 2, 6, 0.2, 950 + trial);
    const UpdateSchedule schedule = periodic(4, 6);  // updates at 0 and 4
    const EpisodeResult episode = run_episode(M, schedule, default_agent(4), 100 + trial, 0);
    const ExecutedPolicies exec =
        executed_policies(schedule, episode.plans, episode.initial_policy, 6);
    const ExactEvaluation evaluation = exact_evaluate(M, schedule, exec);
    for (Index s0 = 0; s0 < 2; ++s0) {
      const double expected = tvmdp::testing::tree_expansion_return(M, schedule, exec, s0);
      CHECK(evaluation.j_alg(s0) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("exact_evaluate: Monte-Carlo estimate lands within 3 standard errors") {
  const TvMdp M = tvmdp::testing::random_instance(3, 2, 8, 0.1, 96);
  const UpdateSchedule schedule = periodic(3, 8);
  const EpisodeResult episode = run_episode(M, schedule, default_agent(), 23, 0);
  const ExecutedPolicies exec =
      executed_policies(schedule, episode.plans, episode.initial_policy, 8);
  const ExactEvaluation evaluation = exact_evaluate(M, schedule, exec);
  const McEstimate mc = mc_evaluate(M, schedule, exec, 0, 20000, 24);
  CHECK(std::abs(mc.mean - evaluation.j_alg(0)) <= 3.0 * mc.std_error + 1e-9);
}

TEST_CASE("stale-state semantics: skip actions ignore the true state") {
  // Two instances identical up to t=0 but with different kernels at t=1,
  // so the true states diverge from t=2 while the stale state (observed at
  // the single update t=0) is the same. Recorded skip actions must agree.
  TvMdp M1 = stay_pay_instance(5);
  TvMdp M2 = stay_pay_instance(5);
  for (Index t = 1; t < 5; ++t) {
    M2.kernels[static_cast<size_t>(t)][0] << 0, 1, 1, 0;  // action 0 now switches
    M2.kernels[static_cast<size_t>(t)][1] << 1, 0, 0, 1;
  }
  M2.drift = Vector::Ones(5);  // loose but valid budget
  M1.drift = Vector::Ones(5);
  const UpdateSchedule schedule = periodic(5, 5);  // single update at t=0
  const EpisodeResult r1 = run_episode(M1, schedule, default_agent(), 31, 0);
  const EpisodeResult r2 = run_episode(M2, schedule, default_agent(), 31, 0);
  bool states_diverge = false;
  for (size_t i = 2; i < 5; ++i) {
    CHECK(r1.trajectory.steps[i].action == r2.trajectory.steps[i].action);
    if (r1.trajectory.steps[i].state != r2.trajectory.steps[i].state) states_diverge = true;
  }
  CHECK(states_diverge);
}

TEST_CASE("run_episode: the shorter horizon formula fails on a terminal update") {
  const TvMdp M = tvmdp::testing::random_instance(2, 2, 6, 0.1, 95);
  AgentConfig config = default_agent(4);
  config.horizon_rule = HorizonRule::ExcludeLast;

  const UpdateSchedule safe = generate_schedule(ExplicitScheduleSpec{{0, 3}}, 6);
  CHECK_NOTHROW(run_episode(M, safe, config, 13, 0));

  // an update at T-1 yields H = min(H_bar, T-1-t) = 0
  const UpdateSchedule terminal = generate_schedule(ExplicitScheduleSpec{{0, 5}}, 6);
  CHECK_THROWS_AS(run_episode(M, terminal, config, 13, 0), EpisodeError);
}

TEST_CASE("dynamic_regret: oracle-matching configuration has zero regret") {
  const TvMdp M = stay_pay_instance(7);
  const UpdateSchedule schedule = periodic(1, 7);
  const EpisodeResult episode = run_episode(M, schedule, default_agent(7), 37, 0);
  const ExecutedPolicies exec =
      executed_policies(schedule, episode.plans, episode.initial_policy, 7);
  const ExactEvaluation evaluation = exact_evaluate(M, schedule, exec);
  const ValueTables tables = solve_oracle(M);
  const RegretResult regret = dynamic_regret(M, tables, evaluation);
  CHECK(regret.dr <= 1e-9);
  CHECK(regret.dr >= -1e-9);
}

TEST_CASE("dynamic_regret: nonnegative on random instances") {
  for (int trial = 0; trial < 8; ++trial) {
    const TvMdp M = tvmdp::testing::random_instance(3, 2, 7, 0.15, 970 + trial);
    const UpdateSchedule schedule = periodic(1 + trial % 3, 7);
    const EpisodeResult episode = run_episode(M, schedule, default_agent(), 41 + trial, 0);
    const ExecutedPolicies exec =
        executed_policies(schedule, episode.plans, episode.initial_policy, 7);
    const ExactEvaluation evaluation = exact_evaluate(M, schedule, exec);
    const ValueTables tables = solve_oracle(M);
    CHECK(dynamic_regret(M, tables, evaluation).dr >= -1e-9);
  }
}

TEST_CASE("schedule refinement: frequent updates do not hurt on average") {
  double dr_fast = 0.0;
  double dr_slow = 0.0;
  const int n_instances = 20;
  for (int trial = 0; trial < n_instances; ++trial) {
    const TvMdp M = tvmdp::testing::random_instance(3, 2, 16, 0.08, 3000 + trial);
    const ValueTables tables = solve_oracle(M);
    for (const Index period : {1, 8}) {
      const UpdateSchedule schedule = periodic(period, 16);
      const EpisodeResult episode =
          run_episode(M, schedule, default_agent(6), 500 + trial, 0);
      const ExecutedPolicies exec =
          executed_policies(schedule, episode.plans, episode.initial_policy, 16);
      const ExactEvaluation evaluation = exact_evaluate(M, schedule, exec);
      const double dr = dynamic_regret(M, tables, evaluation).dr;
      (period == 1 ? dr_fast : dr_slow) += dr;
    }
  }
  CHECK(dr_fast / n_instances <= dr_slow / n_instances);
}

TEST_CASE("joint distributions stay normalized and recouple at updates") {
  const TvMdp M = tvmdp::testing::random_instance(3, 2, 9, 0.1, 98);
  const UpdateSchedule schedule = periodic(3, 9);
  const EpisodeResult episode = run_episode(M, schedule, default_agent(), 43, 1);
  const ExecutedPolicies exec =
      executed_policies(schedule, episode.plans, episode.initial_policy, 9);
  const ExactEvaluation evaluation = exact_evaluate(M, schedule, exec);
  for (Index s0 = 0; s0 < 3; ++s0) {
    for (Index t = 0; t < 9; ++t) {
      const Matrix& mu = evaluation.joints[static_cast<size_t>(s0)][static_cast<size_t>(t)];
      CHECK(std::abs(mu.sum() - 1.0) < 1e-12);
      CHECK(mu.minCoeff() >= -1e-15);
      // One step after an update all mass sits on the diagonal.
      if (t > 0 && is_update_time(schedule, t - 1))
        CHECK(std::abs(mu.diagonal().sum() - 1.0) < 1e-12);
    }
  }
}
