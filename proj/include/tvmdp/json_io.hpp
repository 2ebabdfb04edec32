#pragma once

#include "tvmdp/analysis.hpp"
#include "tvmdp/estimator.hpp"
#include "tvmdp/oracle.hpp"
#include "tvmdp/planner.hpp"
#include "tvmdp/scenario.hpp"
#include "tvmdp/types.hpp"

#include <json.hpp>

namespace tvmdp {

// On-disk schema: {"n_states", "n_actions", "horizon",
// "kernels": [t][s][a][s'], "rewards": [t][s][a], "drift": [t]}.
nlohmann::json to_json(const TvMdp& M);
TvMdp tvmdp_from_json(const nlohmann::json& j);

nlohmann::json to_json(const UpdateSchedule& schedule);
UpdateSchedule schedule_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ValueTables& tables);
nlohmann::json to_json(const ChainEstimate& estimate);
nlohmann::json to_json(const UncertaintyIntervals& intervals);
nlohmann::json to_json(const PlanArtifact& artifact);
nlohmann::json to_json(const BoundBreakdown& breakdown);

nlohmann::json to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScheduleSpec& spec);
ScheduleSpec schedule_spec_from_json(const nlohmann::json& j);

}  // namespace tvmdp
