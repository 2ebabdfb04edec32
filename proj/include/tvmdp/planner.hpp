#pragma once

#include "tvmdp/estimator.hpp"
#include "tvmdp/types.hpp"

#include <vector>

namespace tvmdp {

// Which planning-horizon formula to use at time t with cap H_bar. The config
// strings "appendix" (min(H_bar, T-t), the default) and "section2"
// (min(H_bar, T-1-t)) select between them.
enum class HorizonRule { FullTail, ExcludeLast };

Index planning_horizon(HorizonRule rule, Index h_bar, Index horizon, Index t);

// Output of one planning pass at update time t: bonus-augmented rewards,
// value tables W (h in [0, H], W[H] = 0), state-action tables Z, and the
// greedy policy per stage. Only policies[0] is ever executed; the rest are
// kept for diagnostics against W/Z.
struct PlanArtifact {
  Index update_time = 0;
  Index plan_horizon = 0;
  std::vector<Matrix> augmented_rewards;  // [h](s, a)
  std::vector<Vector> W;                  // [h](s)
  std::vector<Matrix> Z;                  // [h](s, a)
  std::vector<MarkovPolicy> policies;     // [h], deterministic
  double span_bound = 0.0;                // max_h sp(W_h)
};

// r^(beta)_{t,h}(s,a) = r_{t+h}(s,a) + beta * u_{t+h|t}(s,a) for h in
// [0, plan_horizon). `forecasts[h]` must be the uncertainty forecast at
// offset h from the planning time.
std::vector<Matrix> build_augmented_rewards(const std::vector<Matrix>& rewards,
                                            const std::vector<UncertaintyIntervals>& forecasts,
                                            Index t, Index plan_horizon, double beta);

// Backward induction under the frozen kernel:
//   W_h(s) = max_a { r^(beta)_h(s,a) + E_{s'~P_hat}[W_{h+1}(s')] }.
PlanArtifact plan(const ControlledKernel& frozen_kernel,
                  const std::vector<Matrix>& augmented_rewards, Index update_time);

// The receding-horizon head of the plan, reused until the next update.
const MarkovPolicy& first_policy(const PlanArtifact& artifact);

}  // namespace tvmdp
