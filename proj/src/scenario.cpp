#include "tvmdp/scenario.hpp"

#include "tvmdp/distance.hpp"
#include "tvmdp/errors.hpp"
#include "tvmdp/validate.hpp"

#include <cmath>
#include <random>

namespace tvmdp {

namespace {

// Exact per-step drift: eps_t = max coordinate change between consecutive
// kernels; the trailing entry carries no constraint and is set to 0.
void attach_exact_drift(TvMdp& M) {
  M.drift = Vector::Zero(M.horizon);
  for (Index t = 0; t + 1 < M.horizon; ++t)
    M.drift(t) = max_coordinate_change(M.kernels[static_cast<size_t>(t)],
                                       M.kernels[static_cast<size_t>(t) + 1]);
}

TvMdp make_two_state_rotating(const TwoStateRotatingSpec& spec, Index horizon) {
  if (spec.amplitude < 0.0 || spec.amplitude > 0.5)
    throw InvalidInputError("two_state_rotating: amplitude must lie in [0, 0.5]");
  TvMdp M;
  M.n_states = 2;
  M.n_actions = 2;
  M.horizon = horizon;
  Matrix reward(2, 2);
  reward << 1.0, 0.3, 0.0, 0.6;
  for (Index t = 0; t < horizon; ++t) {
    const double p = 0.5 + spec.amplitude * std::sin(spec.angular_rate * double(t));
    const double q = 0.5 + spec.amplitude * std::cos(spec.angular_rate * double(t));
    ControlledKernel kernel(2, Matrix(2, 2));
    kernel[0] << p, 1.0 - p, 1.0 - p, p;
    kernel[1] << q, 1.0 - q, 1.0 - q, q;
    M.kernels.push_back(std::move(kernel));
    M.rewards.push_back(reward);
  }
  attach_exact_drift(M);
  return M;
}

TvMdp make_random_drift(const RandomDriftSpec& spec, Index horizon) {
  if (spec.n_states < 1 || spec.n_actions < 1)
    throw InvalidInputError("random_drift: state/action counts must be positive");
  if (spec.drift_budget < 0.0 || spec.drift_budget > 1.0)
    throw InvalidInputError("random_drift: drift budget must lie in [0, 1]");

  const Index S = spec.n_states;
  const Index A = spec.n_actions;
  const double min_mass = 0.05 / static_cast<double>(S);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  TvMdp M;
  M.n_states = S;
  M.n_actions = A;
  M.horizon = horizon;

  ControlledKernel kernel(static_cast<size_t>(A), Matrix(S, S));
  for (Index a = 0; a < A; ++a)
    for (Index s = 0; s < S; ++s) {
      Vector row(S);
      for (Index sn = 0; sn < S; ++sn) row(sn) = 0.5 + uniform(rng);
      kernel[static_cast<size_t>(a)].row(s) = (row / row.sum()).transpose();
    }
  Matrix reward(S, A);
  for (Index s = 0; s < S; ++s)
    for (Index a = 0; a < A; ++a) reward(s, a) = uniform(rng);

  for (Index t = 0; t < horizon; ++t) {
    M.kernels.push_back(kernel);
    M.rewards.push_back(reward);
    if (t + 1 == horizon) break;
    // Random walk: move mass between one pair of coordinates per row, never
    // below the support floor, never beyond the per-step budget.
    for (Index a = 0; a < A; ++a)
      for (Index s = 0; s < S; ++s) {
        if (S < 2) continue;
        auto& row = kernel[static_cast<size_t>(a)];
        const Index from = static_cast<Index>(uniform(rng) * double(S)) % S;
        Index to = static_cast<Index>(uniform(rng) * double(S - 1)) % (S - 1);
        if (to >= from) ++to;
        const double target = spec.drift_budget * uniform(rng);
        const double move =
            std::min({target, row(s, from) - min_mass, 1.0 - row(s, to)});
        if (move <= 0.0) continue;
        row(s, from) -= move;
        row(s, to) += move;
      }
  }
  attach_exact_drift(M);
  return M;
}

TvMdp make_gridworld_wind(const GridworldWindSpec& spec, Index horizon) {
  if (spec.side < 1) throw InvalidInputError("gridworld_wind: side must be >= 1");
  if (spec.drift_amplitude < 0.0 || spec.drift_amplitude > 0.3)
    throw InvalidInputError("gridworld_wind: drift amplitude must lie in [0, 0.3]");
  if (spec.period < 1) throw InvalidInputError("gridworld_wind: period must be >= 1");

  const Index n = spec.side;
  const Index S = n * n;
  const Index A = 4;
  const Index goal = S - 1;
  const auto cell = [&](Index r, Index c) { return r * n + c; };

  TvMdp M;
  M.n_states = S;
  M.n_actions = A;
  M.horizon = horizon;

  Matrix reward = Matrix::Zero(S, A);
  reward.row(goal).setOnes();

  constexpr int dr[4] = {-1, 1, 0, 0};
  constexpr int dc[4] = {0, 0, -1, 1};
  for (Index t = 0; t < horizon; ++t) {
    const double success =
        0.7 + spec.drift_amplitude *
                  std::sin(2.0 * M_PI * double(t) / double(spec.period));
    ControlledKernel kernel(static_cast<size_t>(A), Matrix::Zero(S, S));
    for (Index a = 0; a < A; ++a)
      for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < n; ++c) {
          const Index s = cell(r, c);
          const Index rr = std::clamp<Index>(r + dr[a], 0, n - 1);
          const Index cc = std::clamp<Index>(c + dc[a], 0, n - 1);
          kernel[static_cast<size_t>(a)](s, cell(rr, cc)) += success;
          kernel[static_cast<size_t>(a)](s, s) += 1.0 - success;
        }
    M.kernels.push_back(std::move(kernel));
    M.rewards.push_back(reward);
  }
  attach_exact_drift(M);
  return M;
}

}  // namespace

TvMdp generate_scenario(const ScenarioSpec& spec, Index horizon) {
  if (horizon < 1) throw InvalidInputError("generate_scenario: horizon must be >= 1");
  TvMdp M = std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TwoStateRotatingSpec>)
          return make_two_state_rotating(s, horizon);
        else if constexpr (std::is_same_v<T, RandomDriftSpec>)
          return make_random_drift(s, horizon);
        else
          return make_gridworld_wind(s, horizon);
      },
      spec);
  require_valid(M);
  return M;
}

UpdateSchedule generate_schedule(const ScheduleSpec& spec, Index horizon) {
  if (horizon < 1) throw InvalidInputError("generate_schedule: horizon must be >= 1");
  UpdateSchedule schedule;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PeriodicScheduleSpec>) {
          if (s.period < 1)
            throw InvalidInputError("generate_schedule: period must be >= 1");
          for (Index t = 0; t < horizon; t += s.period) schedule.times.push_back(t);
        } else if constexpr (std::is_same_v<T, ExplicitScheduleSpec>) {
          schedule.times = s.times;
        } else {
          if (s.density < 0.0 || s.density > 1.0)
            throw InvalidInputError("generate_schedule: density must lie in [0, 1]");
          std::mt19937_64 rng(s.seed);
          std::uniform_real_distribution<double> uniform(0.0, 1.0);
          schedule.times.push_back(0);
          for (Index t = 1; t < horizon; ++t)
            if (uniform(rng) < s.density) schedule.times.push_back(t);
        }
      },
      spec);
  const ValidationReport report = validate_schedule(schedule, horizon);
  if (!report.ok()) throw InvalidInputError(report.issues.front().message);
  return schedule;
}

}  // namespace tvmdp
