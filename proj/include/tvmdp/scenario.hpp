#pragma once

#include "tvmdp/types.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace tvmdp {

// Two-state chain whose stay probabilities rotate sinusoidally over time;
// amplitude 0 gives a stationary instance.
struct TwoStateRotatingSpec {
  double amplitude = 0.2;
  double angular_rate = 0.35;
};

// Random full-support instance whose kernel rows random-walk under an exact
// per-step coordinate budget.
struct RandomDriftSpec {
  Index n_states = 3;
  Index n_actions = 2;
  double drift_budget = 0.02;
  std::uint64_t seed = 1;
};

// side x side gridworld with a time-varying success probability for the
// intended move ("wind"), goal reward at the far corner.
struct GridworldWindSpec {
  Index side = 2;
  double drift_amplitude = 0.1;
  Index period = 8;
};

using ScenarioSpec = std::variant<TwoStateRotatingSpec, RandomDriftSpec, GridworldWindSpec>;

// Deterministic given the spec (and its seed); the drift array is the exact
// per-step maximum coordinate change, so the agent's prior is tight.
TvMdp generate_scenario(const ScenarioSpec& spec, Index horizon);

struct PeriodicScheduleSpec {
  Index period = 1;
};
struct ExplicitScheduleSpec {
  std::vector<Index> times;
};
struct RandomScheduleSpec {
  double density = 0.5;
  std::uint64_t seed = 1;
};

using ScheduleSpec = std::variant<PeriodicScheduleSpec, ExplicitScheduleSpec, RandomScheduleSpec>;

// Periodic: {0, p, 2p, ...} in [0, T). Explicit: as given (must start at 0,
// sorted). Random: 0 plus seeded Bernoulli inclusion of each later step.
UpdateSchedule generate_schedule(const ScheduleSpec& spec, Index horizon);

}  // namespace tvmdp
