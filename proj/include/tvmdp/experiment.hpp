#pragma once

#include "tvmdp/analysis.hpp"
#include "tvmdp/controller.hpp"
#include "tvmdp/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tvmdp {

struct MixingConfig {
  Index m = 1;
};

struct EvalConfig {
  bool exact = true;
  Index mc_rollouts = 0;  // 0 disables the Monte-Carlo cross-check
};

struct ExperimentConfig {
  ScenarioSpec scenario = TwoStateRotatingSpec{0.3, 0.7};
  Index horizon = 24;
  ScheduleSpec schedule = PeriodicScheduleSpec{2};
  AgentConfig agent{0.25, 4, 1e-10, 50000, HorizonRule::FullTail};
  MixingConfig mixing;
  EvalConfig eval{true, 20000};
  std::uint64_t seed = 1;
  Index start_state = 0;
  std::vector<Index> sweep_periods = {1, 2, 4, 8};
  std::string out_dir = "out";
  std::string format = "csv";  // "csv" | "json"
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

// Everything a single run produces, before any files are written.
struct RunResult {
  TvMdp instance;
  UpdateSchedule schedule;
  EpisodeResult episode;
  ExactEvaluation evaluation;
  ValueTables tables;
  RegretDecomposition decomposition;
  RegretResult regret;
  MixingCertificate mixing;
  std::optional<BoundBreakdown> bound;  // absent when eta = 0
  McEstimate mc;                        // at the regret-maximizing start state
  double runtime_seconds = 0.0;
};

// generate -> run_episode -> exact_evaluate -> per_step_regret ->
// certify_mixing -> theorem_bound. The mixing certificate takes the minimum
// overlap over every start state's effective policy sequence; eta = 0 leaves
// the bound unset instead of failing the run.
RunResult run_pipeline(const ExperimentConfig& config);

// Writes trajectory.(csv|json), regret.(csv|json), summary.json and
// config.json into config.out_dir. Any stage error produces error.json plus
// whatever artifacts exist. Returns the process exit code.
int run_and_write(const ExperimentConfig& config);

struct SweepCell {
  Index period = 0;
  double dr_exact = 0.0;
  double dr_mc = 0.0;
  double dr_mc_stderr = 0.0;
  double bound_total = 0.0;
  double eta = 0.0;
  std::string error;  // empty on success
};

// One run per period over periodic schedules; failures are recorded in-row.
std::vector<SweepCell> sweep(const ExperimentConfig& config,
                             const std::vector<Index>& periods);

int sweep_and_write(const ExperimentConfig& config, const std::vector<Index>& periods);

// Runs the pipeline and writes only the bound breakdown (bound.csv/bound.json).
int bound_and_write(const ExperimentConfig& config);

// 17 significant digits: round-trip exact for 64-bit floats.
std::string format_double(double value);

}  // namespace tvmdp
