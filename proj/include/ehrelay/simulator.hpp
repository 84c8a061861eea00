#ifndef EHRELAY_SIMULATOR_HPP
#define EHRELAY_SIMULATOR_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ehrelay/model.hpp"
#include "ehrelay/optimizer.hpp"
#include "ehrelay/random.hpp"
#include "ehrelay/utility.hpp"

namespace ehrelay {

struct SimOutcome {
  Eigen::MatrixXd energy;  ///< K x N, stored joules at the end of each block
  int qos_violations = 0;
  int energy_outage_blocks = 0;
  int causality_violations = 0;
  int witness_failures = 0;     ///< constructive scheduler found no active relay
  bool relay_division = true;   ///< multi-pair runs: child ledgers came from a joint division
  double no_outage_ratio = 1.0;
  double max_source_power = 0.0;
};

struct SimRun {
  SimOutcome outcome;
  RelaySchedule schedule;
  Eigen::MatrixXd source_power;  ///< M x N, 0 on outage blocks
  Eigen::MatrixXd relay_power;   ///< M x N, 0 on outage blocks
};

/// Candidates (positive assigned power) whose stored energy covers the
/// assigned half-block transmission at the current relay stage.
std::vector<int> active_set(const EnergyLedger& ledger, const Eigen::VectorXd& p_relay_row);

/// Uniform choice among the active candidates of each pair, pairs in index order.
SimRun run_random_policy(const Scenario& s, const EhTrace& trace, const PolicyResult& policy,
                         Rng& rng);

/// Per block and pair, the active candidate with the largest energy surplus
/// 2 E / (P T_c) - 1 measured at the end of the previous block. With several
/// pairs each pair schedules against its own child relays.
SimRun run_constructive_scheduler(const Scenario& s, const EhTrace& trace,
                                  const PolicyResult& policy);

struct OnlineRun {
  SimRun run;
  std::vector<double> interval_eta;  ///< per EH interval; +infinity when no policy was found
  double offline_eta = 0.0;
  double mean_eta = 0.0;
};

/// At each EH interval the policy is re-solved on a trace whose future
/// intervals repeat the current rates, then applied for that interval.
OnlineRun run_online_mode(const Scenario& s, const EhTrace& trace, const Utility& u,
                          const BisectOptions& opt = {});

struct ScheduleCheck {
  int causality_violations = 0;  ///< (relay, block prefix) pairs over budget
  int qos_violations = 0;        ///< served pair-blocks below u_th
  int selection_violations = 0;  ///< pair-blocks with more than one relay
};

/// Independent replay of a finished run against the prefix energy
/// inequality and the QoS threshold.
ScheduleCheck check_schedule(const Scenario& s, const EhTrace& trace, const Utility& u,
                             const SimRun& run);

std::string to_json(const SimOutcome& outcome);

/// CSV with header block,relay,joules.
void write_energy_csv(std::ostream& out, const SimOutcome& outcome);

}  // namespace ehrelay

#endif  // EHRELAY_SIMULATOR_HPP
