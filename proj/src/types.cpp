#include "tvmdp/types.hpp"

#include "tvmdp/errors.hpp"

#include <algorithm>

namespace tvmdp {

bool is_update_time(const UpdateSchedule& schedule, Index t) {
  return std::binary_search(schedule.times.begin(), schedule.times.end(), t);
}

Index last_update_index(const UpdateSchedule& schedule, Index t) {
  if (schedule.times.empty() || schedule.times.front() != 0 || t < 0)
    throw InvalidInputError("last_update_index: schedule must start at 0 and t >= 0");
  auto it = std::upper_bound(schedule.times.begin(), schedule.times.end(), t);
  return static_cast<Index>(it - schedule.times.begin()) - 1;
}

MarkovPolicy deterministic_policy(const Eigen::VectorXi& action, Index n_actions) {
  MarkovPolicy pi = MarkovPolicy::Zero(action.size(), n_actions);
  for (Index s = 0; s < action.size(); ++s) pi(s, action(s)) = 1.0;
  return pi;
}

MarkovPolicy constant_policy(Index n_states, Index n_actions, Index action) {
  MarkovPolicy pi = MarkovPolicy::Zero(n_states, n_actions);
  pi.col(action).setOnes();
  return pi;
}

MarkovPolicy uniform_policy(Index n_states, Index n_actions) {
  return MarkovPolicy::Constant(n_states, n_actions, 1.0 / static_cast<double>(n_actions));
}

}  // namespace tvmdp
