#include "tvmdp/planner.hpp"

#include "tvmdp/errors.hpp"
#include "tvmdp/oracle.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

using namespace tvmdp;

namespace {

// Point uncertainty intervals (u = 0 everywhere) at the given base time.
UncertaintyIntervals point_intervals(Index S, Index A, Index base_time) {
  UncertaintyIntervals intervals;
  intervals.base_time = base_time;
  intervals.offset = 0;
  intervals.lo.assign(static_cast<size_t>(A), Matrix::Zero(S, S));
  intervals.hi.assign(static_cast<size_t>(A), Matrix::Zero(S, S));
  intervals.diameter = Matrix::Zero(S, A);
  return intervals;
}

UncertaintyIntervals constant_diameter(Index S, Index A, Index base_time, double u) {
  UncertaintyIntervals intervals = point_intervals(S, A, base_time);
  intervals.diameter.setConstant(u);
  return intervals;
}

// Brute-force optimum over all deterministic H-step policy sequences under a
// frozen kernel and per-stage rewards.
Vector brute_force_plan_values(const ControlledKernel& kernel,
                               const std::vector<Matrix>& rewards) {
  TvMdp M;
  M.n_states = kernel.front().rows();
  M.n_actions = static_cast<Index>(kernel.size());
  M.horizon = static_cast<Index>(rewards.size());
  M.kernels.assign(static_cast<size_t>(M.horizon), kernel);
  M.rewards = rewards;
  M.drift = Vector::Ones(M.horizon);
  return tvmdp::testing::brute_force_optimal_values(M);
}

}  // namespace

TEST_CASE("planning_horizon: the two formulas and their endpoint behavior") {
  // full-tail: min(H_bar, T - t); exclude-last: min(H_bar, T - 1 - t)
  CHECK(planning_horizon(HorizonRule::FullTail, 5, 10, 0) == 5);
  CHECK(planning_horizon(HorizonRule::FullTail, 5, 10, 8) == 2);
  CHECK(planning_horizon(HorizonRule::FullTail, 5, 10, 9) == 1);
  CHECK(planning_horizon(HorizonRule::ExcludeLast, 5, 10, 8) == 1);
  CHECK(planning_horizon(HorizonRule::ExcludeLast, 5, 10, 9) == 0);
}

TEST_CASE("build_augmented_rewards: bonus arithmetic") {
  const TvMdp M = tvmdp::testing::random_instance(3, 2, 6, 0.1, 61);
  std::vector<UncertaintyIntervals> forecasts;
  for (Index h = 0; h < 3; ++h) forecasts.push_back(constant_diameter(3, 2, 1, 0.5));

  SUBCASE("beta = 0 reproduces the true rewards") {
    const auto augmented = build_augmented_rewards(M.rewards, forecasts, 1, 3, 0.0);
    for (Index h = 0; h < 3; ++h)
      CHECK((augmented[static_cast<size_t>(h)] - M.rewards[static_cast<size_t>(1 + h)])
                .cwiseAbs()
                .maxCoeff() == doctest::Approx(0.0));
  }
  SUBCASE("beta = 2 with u = 0.5 shifts every entry by 1") {
    const auto augmented = build_augmented_rewards(M.rewards, forecasts, 1, 3, 2.0);
    for (Index h = 0; h < 3; ++h)
      CHECK((augmented[static_cast<size_t>(h)] - M.rewards[static_cast<size_t>(1 + h)] -
             Matrix::Ones(3, 2))
                .cwiseAbs()
                .maxCoeff() < 1e-15);
  }
  SUBCASE("missing forecasts are rejected") {
    CHECK_THROWS_AS(build_augmented_rewards(M.rewards, forecasts, 1, 4, 1.0),
                    InvalidInputError);
  }
  SUBCASE("negative beta is rejected") {
    CHECK_THROWS_AS(build_augmented_rewards(M.rewards, forecasts, 1, 3, -0.1),
                    InvalidInputError);
  }
}

TEST_CASE("plan: one-step horizon takes the best immediate augmented reward") {
  const TvMdp M = tvmdp::testing::random_instance(3, 2, 2, 0.1, 62);
  const PlanArtifact artifact = plan(M.kernels[0], {M.rewards[0]}, 0);
  for (Index s = 0; s < 3; ++s)
    CHECK(artifact.W[0](s) == doctest::Approx(M.rewards[0].row(s).maxCoeff()));
}

TEST_CASE("plan: frozen true kernel on a stationary instance matches the oracle tail") {
  TvMdp M = tvmdp::testing::random_instance(3, 2, 5, 0.0, 63);  // stationary
  const ValueTables tables = solve_oracle(M);
  for (Index t = 0; t < 5; ++t) {
    std::vector<Matrix> tail(M.rewards.begin() + t, M.rewards.end());
    const PlanArtifact artifact = plan(M.kernels[static_cast<size_t>(t)], tail, t);
    CHECK((artifact.W[0] - tables.V[static_cast<size_t>(t)]).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("plan: zero rewards give zero tables and the tie-break policy") {
  const TvMdp M = tvmdp::testing::random_instance(2, 2, 3, 0.1, 64);
  const std::vector<Matrix> zeros(3, Matrix::Zero(2, 2));
  const PlanArtifact artifact = plan(M.kernels[0], zeros, 0);
  for (const Vector& w : artifact.W) CHECK(w.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  for (Index s = 0; s < 2; ++s) CHECK(first_policy(artifact)(s, 0) == 1.0);
  CHECK(artifact.span_bound == doctest::Approx(0.0));
}

TEST_CASE("plan: rejects an empty horizon") {
  const TvMdp M = tvmdp::testing::random_instance(2, 2, 2, 0.1, 65);
  CHECK_THROWS_AS(plan(M.kernels[0], {}, 0), InvalidInputError);
}

TEST_CASE("plan: stored Z tables satisfy the recursion identically") {
  const TvMdp M = tvmdp::testing::random_instance(3, 2, 4, 0.1, 66);
  const std::vector<Matrix> rewards(M.rewards.begin(), M.rewards.begin() + 3);
  const PlanArtifact artifact = plan(M.kernels[0], rewards, 0);
  for (Index h = 0; h < 3; ++h)
    for (Index a = 0; a < 2; ++a) {
      const Vector expected = rewards[static_cast<size_t>(h)].col(a) +
                              M.kernels[0][static_cast<size_t>(a)] *
                                  artifact.W[static_cast<size_t>(h) + 1];
      CHECK((artifact.Z[static_cast<size_t>(h)].col(a) - expected).cwiseAbs().maxCoeff() <
            1e-12);
    }
}

TEST_CASE("plan: brute-force agreement on small horizons") {
  for (int trial = 0; trial < 8; ++trial) {
    const TvMdp M = tvmdp::testing::random_instance(3, 2, 3, 0.2, 700 + trial);
    const std::vector<Matrix> rewards(M.rewards.begin(), M.rewards.end());
    const PlanArtifact artifact = plan(M.kernels[0], rewards, 0);
    const Vector brute = brute_force_plan_values(M.kernels[0], rewards);
    CHECK((artifact.W[0] - brute).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("plan: increasing beta never decreases any W value") {
  const TvMdp M = tvmdp::testing::random_instance(3, 2, 4, 0.1, 80);
  std::vector<UncertaintyIntervals> forecasts;
  for (Index h = 0; h < 3; ++h) forecasts.push_back(constant_diameter(3, 2, 0, 0.25 * (h + 1)));
  const auto low = build_augmented_rewards(M.rewards, forecasts, 0, 3, 0.5);
  const auto high = build_augmented_rewards(M.rewards, forecasts, 0, 3, 1.5);
  const PlanArtifact plan_low = plan(M.kernels[0], low, 0);
  const PlanArtifact plan_high = plan(M.kernels[0], high, 0);
  for (size_t h = 0; h < plan_low.W.size(); ++h)
    CHECK(((plan_high.W[h] - plan_low.W[h]).array() >= -1e-12).all());
}

TEST_CASE("first_policy: deterministic and reproducible") {
  const TvMdp M = tvmdp::testing::random_instance(3, 2, 4, 0.1, 81);
  const std::vector<Matrix> rewards(M.rewards.begin(), M.rewards.begin() + 2);
  const PlanArtifact a1 = plan(M.kernels[0], rewards, 0);
  const PlanArtifact a2 = plan(M.kernels[0], rewards, 0);
  CHECK((first_policy(a1) - first_policy(a2)).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  for (Index s = 0; s < 3; ++s) CHECK(first_policy(a1).row(s).sum() == doctest::Approx(1.0));
}

TEST_CASE("first_policy: perfect model on the worked oracle example plays action 1") {
  // Worked two-step instance: r_0(s,a) = a, r_1(s,a) = s, P_0 sends to state a.
  TvMdp M;
  M.n_states = 2;
  M.n_actions = 2;
  M.horizon = 2;
  ControlledKernel P0(2, Matrix(2, 2)), P1(2, Matrix(2, 2));
  P0[0] << 1, 0, 1, 0;
  P0[1] << 0, 1, 0, 1;
  P1[0] << 0.5, 0.5, 0.5, 0.5;
  P1[1] << 0.5, 0.5, 0.5, 0.5;
  M.kernels = {P0, P1};
  Matrix r0(2, 2), r1(2, 2);
  r0 << 0, 1, 0, 1;
  r1 << 0, 0, 1, 1;
  M.rewards = {r0, r1};
  M.drift = Vector::Ones(2);

  const PlanArtifact artifact = plan(M.kernels[0], {r0, r1}, 0);
  const ValueTables tables = solve_oracle(M);
  CHECK((first_policy(artifact) - tables.greedy[0]).cwiseAbs().maxCoeff() ==
        doctest::Approx(0.0));
  for (Index s = 0; s < 2; ++s) CHECK(first_policy(artifact)(s, 1) == 1.0);
}
