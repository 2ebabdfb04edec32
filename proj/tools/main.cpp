#include "tvmdp/experiment.hpp"
#include "tvmdp/json_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include "acceptance/criteria.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

tvmdp::ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return tvmdp::ExperimentConfig{};  // built-in defaults
  std::ifstream in(path);
  if (!in) throw tvmdp::InvalidInputError("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  return tvmdp::config_from_json(j);
}

void apply_overrides(tvmdp::ExperimentConfig& config, const std::string& out,
                     bool seed_set, std::uint64_t seed, const std::string& format) {
  if (!out.empty()) config.out_dir = out;
  if (seed_set) config.seed = seed;
  if (!format.empty()) config.format = format;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skip-update learning and planning in time-varying MDPs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string format;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<tvmdp::Index> periods;

  const auto add_common = [&](CLI::App* cmd, bool with_format = true) {
    cmd->add_option("--config", config_path, "JSON experiment configuration");
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", seed, "RNG seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });
    if (with_format)
      cmd->add_option("--format", format, "csv or json (overrides config)")
          ->check(CLI::IsMember({"csv", "json"}));
  };

  CLI::App* gen = app.add_subcommand("gen", "generate the instance and schedule files");
  add_common(gen, false);
  CLI::App* run = app.add_subcommand("run", "run one experiment and write the bundle");
  add_common(run);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "sweep update periods");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--periods", periods, "update periods (overrides config)");
  CLI::App* bound_cmd = app.add_subcommand("bound", "compute the regret-bound breakdown");
  add_common(bound_cmd);
  CLI::App* verify = app.add_subcommand("verify", "run the acceptance suite");
  std::string verify_out = "acceptance_out";
  verify->add_option("--out", verify_out, "scratch directory for acceptance artifacts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      tvmdp::ExperimentConfig config = load_config(config_path);
      apply_overrides(config, out_dir, seed_set, seed, format);
      const tvmdp::TvMdp instance =
          tvmdp::generate_scenario(config.scenario, config.horizon);
      const tvmdp::UpdateSchedule schedule =
          tvmdp::generate_schedule(config.schedule, config.horizon);
      std::filesystem::create_directories(config.out_dir);
      std::ofstream mdp_out(std::filesystem::path(config.out_dir) / "mdp.json");
      mdp_out << tvmdp::to_json(instance).dump(2) << "\n";
      std::ofstream sched_out(std::filesystem::path(config.out_dir) / "schedule.json");
      sched_out << tvmdp::to_json(schedule).dump(2) << "\n";
      std::ofstream cfg_out(std::filesystem::path(config.out_dir) / "config.json");
      cfg_out << tvmdp::config_to_json(config).dump(2) << "\n";
      return 0;
    }
    if (run->parsed()) {
      tvmdp::ExperimentConfig config = load_config(config_path);
      apply_overrides(config, out_dir, seed_set, seed, format);
      return tvmdp::run_and_write(config);
    }
    if (sweep_cmd->parsed()) {
      tvmdp::ExperimentConfig config = load_config(config_path);
      apply_overrides(config, out_dir, seed_set, seed, format);
      const std::vector<tvmdp::Index> chosen =
          periods.empty() ? config.sweep_periods : periods;
      return tvmdp::sweep_and_write(config, chosen);
    }
    if (bound_cmd->parsed()) {
      tvmdp::ExperimentConfig config = load_config(config_path);
      apply_overrides(config, out_dir, seed_set, seed, format);
      return tvmdp::bound_and_write(config);
    }
    if (verify->parsed())
      return tvmdp::acceptance::run_acceptance_suite(std::cout, verify_out) ? 0 : 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
