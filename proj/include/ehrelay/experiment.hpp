#ifndef EHRELAY_EXPERIMENT_HPP
#define EHRELAY_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ehrelay/model.hpp"

namespace ehrelay {

/// What a sweep point varies, by experiment name.
///   fig2_power_vs_relays: K     fig3_power_vs_blocks: N_c
///   fig4_hardening:       K     fig5_multipair:       M
struct ExperimentSpec {
  std::string experiment = "fig2_power_vs_relays";
  std::vector<int> sweep;
  int trials = 20;
  std::uint64_t seed = 1;
  std::string output;
  int jobs = 1;
  double epsilon = 1e-4;
  bool timing = false;  ///< fill runtime_ms; breaks byte-identical output
  Scenario scenario;
};

const std::vector<std::string>& experiment_names();

/// Parses JSON text. Empty text or {} yields the defaults. Throws
/// ConfigError listing every unknown key, type error and invalid value.
ExperimentSpec parse_config(const std::string& text, const std::string& base_dir = ".");

/// Reads and parses a config file; relative scenario_path entries resolve
/// against the file's directory.
ExperimentSpec validate_config(const std::string& path);

std::string to_json(const ExperimentSpec& spec);

struct CsvRow {
  std::string experiment;
  int sweep_value = 0;
  std::string trial;  ///< trial index, "median" or "iqr"
  std::string method;
  std::optional<double> eta_watts;
  std::optional<double> no_outage_ratio;
  std::optional<double> runtime_ms;
};

struct ExperimentResult {
  std::vector<CsvRow> rows;  ///< canonical order, aggregates included
  int failed_trials = 0;
  bool solver_stall = false;
};

ExperimentResult run_experiment(const ExperimentSpec& spec);

/// RFC 4180 CSV with the fixed column order of CsvRow.
void write_csv(std::ostream& out, const std::vector<CsvRow>& rows);

}  // namespace ehrelay

#endif  // EHRELAY_EXPERIMENT_HPP
