#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace tvmdp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Tolerance for row-sum and policy-row checks. Validation refuses to
// renormalize: anything further than this from 1 is rejected.
inline constexpr double kRowSumTol = 1e-12;

// Slack added on top of a drift budget when checking the bounded-drift
// condition, to absorb float noise in generated instances.
inline constexpr double kDriftSlack = 1e-12;

// Controlled transition kernel for a single time step. One row-stochastic
// |S| x |S| matrix per action: kernel[a](s, s') = P(s' | s, a).
using ControlledKernel = std::vector<Matrix>;

// Markov policy for a single time step: pi(s, a) = Pr(a | s), rows sum to 1.
// Deterministic policies are one-hot rows.
using MarkovPolicy = Matrix;

// Finite-horizon time-varying MDP with known per-step drift budgets.
// kernels[t][a](s, s') and rewards[t](s, a) for t in [0, T); drift(t) caps
// the coordinatewise change between kernels[t] and kernels[t+1].
struct TvMdp {
  Index n_states = 0;
  Index n_actions = 0;
  Index horizon = 0;
  std::vector<ControlledKernel> kernels;
  std::vector<Matrix> rewards;
  Vector drift;
};

// Sorted update times tau_0 = 0 < tau_1 < ... < tau_N < T. Every time step
// not listed here is a skip time.
struct UpdateSchedule {
  std::vector<Index> times;
};

// True iff t is an update time.
bool is_update_time(const UpdateSchedule& schedule, Index t);

// k(t) = max{k : tau_k <= t}. Requires tau_0 = 0 and t >= 0 so the index
// always exists.
Index last_update_index(const UpdateSchedule& schedule, Index t);

// One-hot policy playing action(s) at state s; `action` may be a constant.
MarkovPolicy deterministic_policy(const Eigen::VectorXi& action, Index n_actions);
MarkovPolicy constant_policy(Index n_states, Index n_actions, Index action);
MarkovPolicy uniform_policy(Index n_states, Index n_actions);

}  // namespace tvmdp
