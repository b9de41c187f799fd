#include "cli.hpp"

#include <CLI11.hpp>
#include <iostream>

namespace fraflow::cli {

namespace {

int dispatch(const std::string& command, const std::string& config_path, const std::string& preset,
             const Overrides& ov) {
  nlohmann::json doc = nlohmann::json::object();
  if (!config_path.empty() && !preset.empty()) throw ConfigError("--config and --preset are mutually exclusive");
  if (!config_path.empty()) doc = read_json_file(config_path);
  if (!preset.empty()) doc = read_json_file(preset_path(preset));
  RunConfig cfg = parse_config(doc);
  if (!cfg.mode.empty() && cfg.mode != command)
    throw ConfigError("config is for mode '" + cfg.mode + "', not '" + command + "'");
  cfg.mode = command;
  if (!ov.out.empty()) cfg.out = ov.out;
  if (ov.seed) cfg.seed = *ov.seed;
  if (command == "solve") return cmd_solve(cfg);
  if (command == "sweep") return cmd_sweep(cfg, ov.jobs);
  if (command == "certify") return cmd_certify(cfg);
  return cmd_kernels(cfg);
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"fractional gradient flows: solve, sweep, certify, kernels"};
  app.require_subcommand(1);

  std::string config_path, preset;
  Overrides ov;
  std::uint64_t seed = 0;
  for (const char* name : {"solve", "sweep", "certify", "kernels"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--preset", preset, "named preset (see FRAFLOW_PRESET_DIR)");
    sub->add_option("--out", ov.out, "output directory");
    sub->add_option("--seed", seed, "seed for randomized suites");
    sub->add_option("--jobs", ov.jobs, "worker threads for sweeps (0: all cores)");
  }

  std::vector<std::string> rest(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  if (app.get_subcommands().front()->count("--seed") > 0) ov.seed = seed;

  try {
    return dispatch(command, config_path, preset, ov);
  } catch (const ConfigError& e) {
    std::cerr << "fraflow: config error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "fraflow: error: " << e.what() << '\n';
    return exit_failure;
  }
}

int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc)); }

}  // namespace fraflow::cli
