#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ehrelay/error.hpp"
#include "ehrelay/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStall = 3;
constexpr int kExitFailure = 1;

int run(const std::string& config, std::optional<std::string> out_path,
        std::optional<std::uint64_t> seed, std::optional<int> trials, std::optional<int> jobs,
        bool timing) {
  ehrelay::ExperimentSpec spec = ehrelay::validate_config(config);
  if (seed) spec.seed = *seed;
  if (trials) spec.trials = *trials;
  if (jobs) spec.jobs = *jobs;
  if (timing) spec.timing = true;
  if (out_path) spec.output = *out_path;
  if (spec.trials < 1 || spec.jobs < 1) {
    throw ehrelay::ConfigError({"--trials and --jobs must be >= 1"});
  }
  if (spec.output.empty()) throw ehrelay::ConfigError({"no output path: pass --out or set output"});

  const ehrelay::ExperimentResult result = ehrelay::run_experiment(spec);
  std::ofstream out(spec.output, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << spec.output << '\n';
    return kExitFailure;
  }
  ehrelay::write_csv(out, result.rows);
  out.close();
  std::cerr << "wrote " << result.rows.size() << " rows to " << spec.output << '\n';
  if (result.failed_trials > 0) {
    std::cerr << result.failed_trials << " trial(s) failed; see rows with method=error\n";
  }
  return result.solver_stall ? kExitStall : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimum source power for relay networks with energy-harvesting relays"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::string> out_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> jobs;
  bool timing = false;

  CLI::App* run_cmd = app.add_subcommand("run", "Run an experiment sweep and write CSV");
  run_cmd->add_option("--config", config, "Experiment JSON file")->required();
  run_cmd->add_option("--out", out_path, "Output CSV path");
  run_cmd->add_option("--seed", seed, "Base RNG seed");
  run_cmd->add_option("--trials", trials, "Trials per sweep value");
  run_cmd->add_option("--jobs", jobs, "Worker threads");
  run_cmd->add_flag("--timing", timing, "Fill the runtime_ms column");

  std::string validate_path;
  CLI::App* validate_cmd = app.add_subcommand("validate", "Check a config and print it normalized");
  validate_cmd->add_option("--config", validate_path, "Experiment JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) return run(config, out_path, seed, trials, jobs, timing);
    const ehrelay::ExperimentSpec spec = ehrelay::validate_config(validate_path);
    std::cout << ehrelay::to_json(spec) << '\n';
    return kExitOk;
  } catch (const ehrelay::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  } catch (const ehrelay::SolverStall& e) {
    std::cerr << e.what() << '\n';
    return kExitStall;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
