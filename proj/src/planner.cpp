#include "tvmdp/planner.hpp"

#include "tvmdp/distance.hpp"
#include "tvmdp/errors.hpp"
#include "tvmdp/oracle.hpp"

#include <algorithm>

namespace tvmdp {

Index planning_horizon(HorizonRule rule, Index h_bar, Index horizon, Index t) {
  switch (rule) {
    case HorizonRule::FullTail:
      return std::min(h_bar, horizon - t);
    case HorizonRule::ExcludeLast:
      return std::min(h_bar, horizon - 1 - t);
  }
  return 0;
}

std::vector<Matrix> build_augmented_rewards(const std::vector<Matrix>& rewards,
                                            const std::vector<UncertaintyIntervals>& forecasts,
                                            Index t, Index plan_horizon, double beta) {
  if (beta < 0.0) throw InvalidInputError("augmented rewards: beta must be >= 0");
  if (static_cast<Index>(forecasts.size()) < plan_horizon)
    throw InvalidInputError("augmented rewards: missing forecast for some offset");
  std::vector<Matrix> augmented;
  augmented.reserve(static_cast<size_t>(plan_horizon));
  for (Index h = 0; h < plan_horizon; ++h) {
    if (t + h >= static_cast<Index>(rewards.size()))
      throw InvalidInputError("augmented rewards: t + h beyond reward horizon");
    augmented.push_back(rewards[static_cast<size_t>(t + h)] +
                        beta * forecasts[static_cast<size_t>(h)].diameter);
  }
  return augmented;
}

PlanArtifact plan(const ControlledKernel& frozen_kernel,
                  const std::vector<Matrix>& augmented_rewards, Index update_time) {
  const auto H = static_cast<Index>(augmented_rewards.size());
  if (H < 1) throw InvalidInputError("plan: planning horizon must be >= 1");
  const Index S = frozen_kernel.front().rows();
  const auto A = static_cast<Index>(frozen_kernel.size());

  PlanArtifact artifact;
  artifact.update_time = update_time;
  artifact.plan_horizon = H;
  artifact.augmented_rewards = augmented_rewards;
  artifact.W.assign(static_cast<size_t>(H) + 1, Vector::Zero(S));
  artifact.Z.assign(static_cast<size_t>(H), Matrix::Zero(S, A));
  artifact.policies.assign(static_cast<size_t>(H), MarkovPolicy::Zero(S, A));

  for (Index h = H - 1; h >= 0; --h) {
    Matrix& Z = artifact.Z[static_cast<size_t>(h)];
    for (Index a = 0; a < A; ++a)
      Z.col(a) = augmented_rewards[static_cast<size_t>(h)].col(a) +
                 frozen_kernel[static_cast<size_t>(a)] * artifact.W[static_cast<size_t>(h) + 1];
    const Eigen::VectorXi actions = greedy_actions(Z);
    for (Index s = 0; s < S; ++s) {
      artifact.W[static_cast<size_t>(h)](s) = Z(s, actions(s));
      artifact.policies[static_cast<size_t>(h)](s, actions(s)) = 1.0;
    }
  }

  double worst = 0.0;
  for (const Vector& w : artifact.W) worst = std::max(worst, span(w));
  artifact.span_bound = worst;
  return artifact;
}

const MarkovPolicy& first_policy(const PlanArtifact& artifact) {
  if (artifact.policies.empty()) throw InvalidInputError("first_policy: empty plan");
  return artifact.policies.front();
}

}  // namespace tvmdp
