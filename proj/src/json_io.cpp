#include "tvmdp/json_io.hpp"

#include "tvmdp/errors.hpp"

namespace tvmdp {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  return v;
}

}  // namespace

json to_json(const TvMdp& M) {
  json j;
  j["n_states"] = M.n_states;
  j["n_actions"] = M.n_actions;
  j["horizon"] = M.horizon;
  json kernels = json::array();
  for (Index t = 0; t < M.horizon; ++t) {
    json per_state = json::array();
    for (Index s = 0; s < M.n_states; ++s) {
      json per_action = json::array();
      for (Index a = 0; a < M.n_actions; ++a) {
        json row = json::array();
        for (Index sn = 0; sn < M.n_states; ++sn)
          row.push_back(M.kernels[static_cast<size_t>(t)][static_cast<size_t>(a)](s, sn));
        per_action.push_back(std::move(row));
      }
      per_state.push_back(std::move(per_action));
    }
    kernels.push_back(std::move(per_state));
  }
  j["kernels"] = std::move(kernels);
  json rewards = json::array();
  for (Index t = 0; t < M.horizon; ++t) rewards.push_back(matrix_to_json(M.rewards[static_cast<size_t>(t)]));
  j["rewards"] = std::move(rewards);
  j["drift"] = vector_to_json(M.drift);
  return j;
}

TvMdp tvmdp_from_json(const json& j) {
  TvMdp M;
  M.n_states = j.at("n_states").get<Index>();
  M.n_actions = j.at("n_actions").get<Index>();
  M.horizon = j.at("horizon").get<Index>();
  const json& kernels = j.at("kernels");
  const json& rewards = j.at("rewards");
  if (static_cast<Index>(kernels.size()) != M.horizon ||
      static_cast<Index>(rewards.size()) != M.horizon)
    throw InvalidInputError("tvmdp_from_json: kernel/reward length != horizon");
  for (Index t = 0; t < M.horizon; ++t) {
    ControlledKernel kernel(static_cast<size_t>(M.n_actions),
                            Matrix::Zero(M.n_states, M.n_states));
    const json& per_state = kernels[static_cast<size_t>(t)];
    for (Index s = 0; s < M.n_states; ++s)
      for (Index a = 0; a < M.n_actions; ++a)
        for (Index sn = 0; sn < M.n_states; ++sn)
          kernel[static_cast<size_t>(a)](s, sn) =
              per_state[static_cast<size_t>(s)][static_cast<size_t>(a)][static_cast<size_t>(sn)]
                  .get<double>();
    M.kernels.push_back(std::move(kernel));
    Matrix reward(M.n_states, M.n_actions);
    const json& reward_rows = rewards[static_cast<size_t>(t)];
    for (Index s = 0; s < M.n_states; ++s)
      for (Index a = 0; a < M.n_actions; ++a)
        reward(s, a) = reward_rows[static_cast<size_t>(s)][static_cast<size_t>(a)].get<double>();
    M.rewards.push_back(std::move(reward));
  }
  M.drift = vector_from_json(j.at("drift"));
  return M;
}

json to_json(const UpdateSchedule& schedule) {
  json j;
  j["times"] = schedule.times;
  return j;
}

UpdateSchedule schedule_from_json(const json& j) {
  UpdateSchedule schedule;
  schedule.times = j.at("times").get<std::vector<Index>>();
  return schedule;
}

json to_json(const ValueTables& tables) {
  json j;
  json v = json::array();
  for (const Vector& vt : tables.V) v.push_back(vector_to_json(vt));
  j["V"] = std::move(v);
  json q = json::array();
  for (const Matrix& qt : tables.Q) q.push_back(matrix_to_json(qt));
  j["Q"] = std::move(q);
  json greedy = json::array();
  for (const MarkovPolicy& pi : tables.greedy) greedy.push_back(matrix_to_json(pi));
  j["greedy"] = std::move(greedy);
  return j;
}

json to_json(const ChainEstimate& estimate) {
  json j;
  j["update_times"] = estimate.update_times;
  json kernels = json::array();
  for (const ControlledKernel& kernel : estimate.kernels) {
    json per_action = json::array();
    for (const Matrix& slice : kernel) per_action.push_back(matrix_to_json(slice));
    kernels.push_back(std::move(per_action));
  }
  j["kernels"] = std::move(kernels);
  j["diagnostics"] = {{"iterations", estimate.diagnostics.iterations},
                      {"kkt_residual", estimate.diagnostics.kkt_residual},
                      {"objective", estimate.diagnostics.objective},
                      {"converged", estimate.diagnostics.converged}};
  return j;
}

json to_json(const UncertaintyIntervals& intervals) {
  json j;
  j["base_time"] = intervals.base_time;
  j["offset"] = intervals.offset;
  json lo = json::array();
  json hi = json::array();
  for (size_t a = 0; a < intervals.lo.size(); ++a) {
    lo.push_back(matrix_to_json(intervals.lo[a]));
    hi.push_back(matrix_to_json(intervals.hi[a]));
  }
  j["lo"] = std::move(lo);
  j["hi"] = std::move(hi);
  j["diameter"] = matrix_to_json(intervals.diameter);
  return j;
}

json to_json(const PlanArtifact& artifact) {
  json j;
  j["update_time"] = artifact.update_time;
  j["plan_horizon"] = artifact.plan_horizon;
  json w = json::array();
  for (const Vector& wh : artifact.W) w.push_back(vector_to_json(wh));
  j["W"] = std::move(w);
  json z = json::array();
  for (const Matrix& zh : artifact.Z) z.push_back(matrix_to_json(zh));
  j["Z"] = std::move(z);
  json policies = json::array();
  for (const MarkovPolicy& pi : artifact.policies) policies.push_back(matrix_to_json(pi));
  j["policies"] = std::move(policies);
  j["span_bound"] = artifact.span_bound;
  return j;
}

json to_json(const BoundBreakdown& breakdown) {
  json j;
  j["m"] = breakdown.m;
  j["eta"] = breakdown.eta;
  j["alpha"] = breakdown.alpha;
  j["v_tilde"] = breakdown.v_tilde;
  j["w_tilde"] = vector_to_json(breakdown.w_tilde);
  j["delta_hat_span"] = vector_to_json(breakdown.delta_hat_span);
  j["update_total"] = breakdown.update_total;
  j["skip_total"] = breakdown.skip_total;
  j["total"] = breakdown.total;
  json rows = json::array();
  for (const BoundRow& row : breakdown.rows)
    rows.push_back({{"t", row.t},
                    {"is_update", row.is_update},
                    {"update_contraction", row.update_contraction},
                    {"update_error", row.update_error},
                    {"skip_contraction", row.skip_contraction},
                    {"skip_error", row.skip_error},
                    {"row_total", row.row_total}});
  j["rows"] = std::move(rows);
  return j;
}

json to_json(const ScenarioSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TwoStateRotatingSpec>)
          return {{"type", "two_state_rotating"},
                  {"amplitude", s.amplitude},
                  {"angular_rate", s.angular_rate}};
        else if constexpr (std::is_same_v<T, RandomDriftSpec>)
          return {{"type", "random_drift"},
                  {"n_states", s.n_states},
                  {"n_actions", s.n_actions},
                  {"drift_budget", s.drift_budget},
                  {"seed", s.seed}};
        else
          return {{"type", "gridworld_wind"},
                  {"side", s.side},
                  {"drift_amplitude", s.drift_amplitude},
                  {"period", s.period}};
      },
      spec);
}

ScenarioSpec scenario_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "two_state_rotating") {
    TwoStateRotatingSpec s;
    s.amplitude = j.value("amplitude", s.amplitude);
    s.angular_rate = j.value("angular_rate", s.angular_rate);
    return s;
  }
  if (type == "random_drift") {
    RandomDriftSpec s;
    s.n_states = j.value("n_states", s.n_states);
    s.n_actions = j.value("n_actions", s.n_actions);
    s.drift_budget = j.value("drift_budget", s.drift_budget);
    s.seed = j.value("seed", s.seed);
    return s;
  }
  if (type == "gridworld_wind") {
    GridworldWindSpec s;
    s.side = j.value("side", s.side);
    s.drift_amplitude = j.value("drift_amplitude", s.drift_amplitude);
    s.period = j.value("period", s.period);
    return s;
  }
  throw InvalidInputError("unknown scenario type: " + type);
}

json to_json(const ScheduleSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PeriodicScheduleSpec>)
          return {{"type", "periodic"}, {"period", s.period}};
        else if constexpr (std::is_same_v<T, ExplicitScheduleSpec>)
          return {{"type", "explicit"}, {"times", s.times}};
        else
          return {{"type", "random"}, {"density", s.density}, {"seed", s.seed}};
      },
      spec);
}

ScheduleSpec schedule_spec_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "periodic") {
    PeriodicScheduleSpec s;
    s.period = j.value("period", s.period);
    return s;
  }
  if (type == "explicit") {
    ExplicitScheduleSpec s;
    s.times = j.at("times").get<std::vector<Index>>();
    return s;
  }
  if (type == "random") {
    RandomScheduleSpec s;
    s.density = j.value("density", s.density);
    s.seed = j.value("seed", s.seed);
    return s;
  }
  throw InvalidInputError("unknown schedule type: " + type);
}

}  // namespace tvmdp
