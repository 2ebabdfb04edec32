#include "tvmdp/experiment.hpp"

#include "tvmdp/errors.hpp"
#include "tvmdp/json_io.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace tvmdp {

using nlohmann::json;

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig config;
  config.scenario = scenario_from_json(j.at("scenario"));
  config.horizon = j.at("horizon").get<Index>();
  config.schedule = schedule_spec_from_json(j.at("schedule"));
  if (j.contains("agent")) {
    const json& agent = j.at("agent");
    config.agent.beta = agent.value("beta", config.agent.beta);
    config.agent.h_bar = agent.value("h_bar", config.agent.h_bar);
    config.agent.cmle_tol = agent.value("cmle_tol", config.agent.cmle_tol);
    config.agent.cmle_max_iters = agent.value("cmle_max_iters", config.agent.cmle_max_iters);
    const std::string rule = agent.value("h_formula", std::string("appendix"));
    if (rule == "appendix")
      config.agent.horizon_rule = HorizonRule::FullTail;
    else if (rule == "section2")
      config.agent.horizon_rule = HorizonRule::ExcludeLast;
    else
      throw InvalidInputError("config: h_formula must be 'appendix' or 'section2'");
  }
  if (j.contains("mixing")) config.mixing.m = j.at("mixing").value("m", config.mixing.m);
  if (j.contains("eval")) {
    config.eval.exact = j.at("eval").value("exact", config.eval.exact);
    config.eval.mc_rollouts = j.at("eval").value("mc_rollouts", config.eval.mc_rollouts);
  }
  config.seed = j.value("seed", config.seed);
  config.start_state = j.value("start_state", config.start_state);
  if (j.contains("sweep_periods"))
    config.sweep_periods = j.at("sweep_periods").get<std::vector<Index>>();
  config.out_dir = j.value("out", config.out_dir);
  config.format = j.value("format", config.format);
  if (config.format != "csv" && config.format != "json")
    throw InvalidInputError("config: format must be 'csv' or 'json'");
  return config;
}

json config_to_json(const ExperimentConfig& config) {
  json j;
  j["scenario"] = to_json(config.scenario);
  j["horizon"] = config.horizon;
  j["schedule"] = to_json(config.schedule);
  j["agent"] = {{"beta", config.agent.beta},
                {"h_bar", config.agent.h_bar},
                {"cmle_tol", config.agent.cmle_tol},
                {"cmle_max_iters", config.agent.cmle_max_iters},
                {"h_formula", config.agent.horizon_rule == HorizonRule::FullTail
                                  ? "appendix"
                                  : "section2"}};
  j["mixing"] = {{"m", config.mixing.m}};
  j["eval"] = {{"exact", config.eval.exact}, {"mc_rollouts", config.eval.mc_rollouts}};
  j["seed"] = config.seed;
  j["start_state"] = config.start_state;
  j["sweep_periods"] = config.sweep_periods;
  j["out"] = config.out_dir;
  j["format"] = config.format;
  return j;
}

RunResult run_pipeline(const ExperimentConfig& config) {
  const auto started = std::chrono::steady_clock::now();

  RunResult result;
  result.instance = generate_scenario(config.scenario, config.horizon);
  result.schedule = generate_schedule(config.schedule, config.horizon);
  result.episode = run_episode(result.instance, result.schedule, config.agent, config.seed,
                               config.start_state);
  result.tables = solve_oracle(result.instance);

  const ExecutedPolicies exec = executed_policies(
      result.schedule, result.episode.plans, result.episode.initial_policy,
      config.horizon);
  result.evaluation = exact_evaluate(result.instance, result.schedule, exec);
  result.decomposition =
      per_step_regret(result.instance, result.tables, result.schedule, result.evaluation);
  result.regret = dynamic_regret(result.instance, result.tables, result.evaluation);

  // Certify mixing against the worst start state's effective policy sequence.
  result.mixing.m = config.mixing.m;
  result.mixing.eta = 1.0;
  for (Index s0 = 0; s0 < result.instance.n_states; ++s0) {
    const MixingCertificate cert =
        certify_mixing(result.instance, result.evaluation.effective[static_cast<size_t>(s0)],
                       result.tables.greedy, config.mixing.m);
    if (s0 == 0) result.mixing = cert;
    if (cert.eta < result.mixing.eta) {
      result.mixing.eta = cert.eta;
      result.mixing.alpha = cert.alpha;
    }
    result.mixing.eta_per_t = result.mixing.eta_per_t.cwiseMin(cert.eta_per_t);
  }
  result.mixing.assumption_holds = result.mixing.eta > 0.0;

  if (result.mixing.assumption_holds)
    result.bound = theorem_bound(result.instance, result.schedule, result.mixing,
                                 result.episode.plans, result.episode.estimates,
                                 result.episode.forecasts, result.tables,
                                 config.agent.beta);

  if (config.eval.mc_rollouts > 0)
    result.mc = mc_evaluate(result.instance, result.schedule, exec, result.regret.argmax_s0,
                            config.eval.mc_rollouts, config.seed + 1);

  result.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

json trajectory_rows(const RunResult& result) {
  json rows = json::array();
  const Index s0 = result.episode.trajectory.start_state;
  for (const TrajectoryStep& step : result.episode.trajectory.steps)
    rows.push_back({{"t", step.t},
                    {"is_update", step.is_update ? 1 : 0},
                    {"s", step.state},
                    {"a", step.action},
                    {"r", step.reward},
                    {"expected_r", result.evaluation.expected_reward(s0, step.t)}});
  return rows;
}

std::string trajectory_csv(const RunResult& result) {
  std::string out = "t,is_update,s,a,r,expected_r\n";
  const Index s0 = result.episode.trajectory.start_state;
  for (const TrajectoryStep& step : result.episode.trajectory.steps) {
    out += std::to_string(step.t) + "," + (step.is_update ? "1" : "0") + "," +
           std::to_string(step.state) + "," + std::to_string(step.action) + "," +
           format_double(step.reward) + "," +
           format_double(result.evaluation.expected_reward(s0, step.t)) + "\n";
  }
  return out;
}

json regret_rows(const RunResult& result) {
  json rows = json::array();
  const Index s0 = result.regret.argmax_s0;
  double cum_regret = 0.0;
  double cum_bound = 0.0;
  for (Index t = 0; t < result.instance.horizon; ++t) {
    const double delta = result.decomposition.delta(s0, t);
    cum_regret += delta;
    double update_term = 0.0;
    double skip_term = 0.0;
    if (result.bound) {
      const BoundRow& row = result.bound->rows[static_cast<size_t>(t)];
      update_term = row.update_contraction + row.update_error;
      skip_term = row.skip_contraction + row.skip_error;
      cum_bound += row.row_total;
    }
    rows.push_back({{"t", t},
                    {"is_update", is_update_time(result.schedule, t) ? 1 : 0},
                    {"delta_t", delta},
                    {"cum_regret", cum_regret},
                    {"bound_update_term", update_term},
                    {"bound_skip_term", skip_term},
                    {"cum_bound", cum_bound}});
  }
  return rows;
}

std::string regret_csv(const RunResult& result) {
  std::string out = "t,is_update,delta_t,cum_regret,bound_update_term,bound_skip_term,cum_bound\n";
  for (const json& row : regret_rows(result)) {
    out += std::to_string(row.at("t").get<Index>()) + "," +
           std::to_string(row.at("is_update").get<int>()) + "," +
           format_double(row.at("delta_t").get<double>()) + "," +
           format_double(row.at("cum_regret").get<double>()) + "," +
           format_double(row.at("bound_update_term").get<double>()) + "," +
           format_double(row.at("bound_skip_term").get<double>()) + "," +
           format_double(row.at("cum_bound").get<double>()) + "\n";
  }
  return out;
}

json summary_json(const RunResult& result, const ExperimentConfig& config) {
  json j;
  j["dr_exact"] = result.regret.dr;
  j["argmax_s0"] = result.regret.argmax_s0;
  json j_star = json::array();
  json j_alg = json::array();
  json gap = json::array();
  for (Index s = 0; s < result.instance.n_states; ++s) {
    j_star.push_back(result.tables.V.front()(s));
    j_alg.push_back(result.evaluation.j_alg(s));
    gap.push_back(result.regret.gap(s));
  }
  j["j_star"] = std::move(j_star);
  j["j_alg"] = std::move(j_alg);
  j["gap"] = std::move(gap);
  if (config.eval.mc_rollouts > 0) {
    j["dr_mc"] = result.tables.V.front()(result.regret.argmax_s0) - result.mc.mean;
    j["dr_mc_stderr"] = result.mc.std_error;
    j["mc_rollouts"] = result.mc.n_rollouts;
  }
  j["eta"] = result.mixing.eta;
  j["alpha"] = result.mixing.alpha;
  j["m"] = result.mixing.m;
  j["assumption_violated"] = !result.mixing.assumption_holds;
  if (result.bound) {
    j["bound_total"] = result.bound->total;
    j["bound_update_total"] = result.bound->update_total;
    j["bound_skip_total"] = result.bound->skip_total;
    j["v_tilde"] = result.bound->v_tilde;
  } else {
    j["v_tilde"] = span_bound(result.tables);
  }
  j["n_updates"] = result.schedule.times.size();
  j["runtime_seconds"] = result.runtime_seconds;
  return j;
}

std::string sweep_csv(const std::vector<SweepCell>& cells) {
  std::string out = "period,dr_exact,dr_mc,dr_mc_stderr,bound_total,eta,error\n";
  for (const SweepCell& cell : cells) {
    out += std::to_string(cell.period) + "," + format_double(cell.dr_exact) + "," +
           format_double(cell.dr_mc) + "," + format_double(cell.dr_mc_stderr) + "," +
           format_double(cell.bound_total) + "," + format_double(cell.eta) + "," +
           cell.error + "\n";
  }
  return out;
}

std::string bound_csv(const BoundBreakdown& breakdown) {
  std::string out =
      "t,is_update,update_contraction,update_error,skip_contraction,skip_error,row_total\n";
  for (const BoundRow& row : breakdown.rows) {
    out += std::to_string(row.t) + "," + (row.is_update ? "1" : "0") + "," +
           format_double(row.update_contraction) + "," + format_double(row.update_error) +
           "," + format_double(row.skip_contraction) + "," + format_double(row.skip_error) +
           "," + format_double(row.row_total) + "\n";
  }
  return out;
}

void write_error(const std::filesystem::path& dir, const std::string& stage,
                 const std::string& message) {
  write_json_file(dir / "error.json", json{{"stage", stage}, {"message", message}});
}

}  // namespace

int run_and_write(const ExperimentConfig& config) {
  const std::filesystem::path dir(config.out_dir);
  std::filesystem::create_directories(dir);
  write_json_file(dir / "config.json", config_to_json(config));
  RunResult result;
  try {
    result = run_pipeline(config);
  } catch (const std::exception& err) {
    write_error(dir, "pipeline", err.what());
    return 1;
  }
  if (config.format == "csv") {
    write_text(dir / "trajectory.csv", trajectory_csv(result));
    write_text(dir / "regret.csv", regret_csv(result));
  } else {
    write_json_file(dir / "trajectory.json", trajectory_rows(result));
    write_json_file(dir / "regret.json", regret_rows(result));
  }
  write_json_file(dir / "summary.json", summary_json(result, config));
  return 0;
}

std::vector<SweepCell> sweep(const ExperimentConfig& config,
                             const std::vector<Index>& periods) {
  if (periods.size() < 2) throw InvalidInputError("sweep: need at least two periods");
  std::vector<Index> ordered = periods;
  std::sort(ordered.begin(), ordered.end());
  std::vector<SweepCell> cells;
  for (const Index period : ordered) {
    SweepCell cell;
    cell.period = period;
    try {
      ExperimentConfig cell_config = config;
      cell_config.schedule = PeriodicScheduleSpec{period};
      const RunResult result = run_pipeline(cell_config);
      cell.dr_exact = result.regret.dr;
      if (cell_config.eval.mc_rollouts > 0) {
        cell.dr_mc = result.tables.V.front()(result.regret.argmax_s0) - result.mc.mean;
        cell.dr_mc_stderr = result.mc.std_error;
      }
      cell.bound_total = result.bound ? result.bound->total : 0.0;
      cell.eta = result.mixing.eta;
      if (!result.bound) cell.error = "assumption_violated";
    } catch (const std::exception& err) {
      cell.error = err.what();
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

int sweep_and_write(const ExperimentConfig& config, const std::vector<Index>& periods) {
  const std::filesystem::path dir(config.out_dir);
  std::filesystem::create_directories(dir);
  write_json_file(dir / "config.json", config_to_json(config));
  try {
    const std::vector<SweepCell> cells = sweep(config, periods);
    write_text(dir / "sweep.csv", sweep_csv(cells));
    if (config.format == "json") {
      json rows = json::array();
      for (const SweepCell& cell : cells)
        rows.push_back({{"period", cell.period},
                        {"dr_exact", cell.dr_exact},
                        {"dr_mc", cell.dr_mc},
                        {"dr_mc_stderr", cell.dr_mc_stderr},
                        {"bound_total", cell.bound_total},
                        {"eta", cell.eta},
                        {"error", cell.error}});
      write_json_file(dir / "sweep.json", rows);
    }
  } catch (const std::exception& err) {
    write_error(dir, "sweep", err.what());
    return 1;
  }
  return 0;
}

int bound_and_write(const ExperimentConfig& config) {
  const std::filesystem::path dir(config.out_dir);
  std::filesystem::create_directories(dir);
  write_json_file(dir / "config.json", config_to_json(config));
  try {
    const RunResult result = run_pipeline(config);
    if (!result.bound) {
      write_error(dir, "bound", "assumption_violated: eta = 0");
      return 1;
    }
    write_text(dir / "bound.csv", bound_csv(*result.bound));
    write_json_file(dir / "bound.json", to_json(*result.bound));
  } catch (const std::exception& err) {
    write_error(dir, "bound", err.what());
    return 1;
  }
  return 0;
}

}  // namespace tvmdp
