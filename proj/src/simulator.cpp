#include "ehrelay/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "ehrelay/error.hpp"
#include "ehrelay/feasibility.hpp"

namespace ehrelay {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQosTolerance = 1e-9;

SimRun start_run(const Scenario& s) {
  const int N = s.total_blocks();
  SimRun run;
  run.schedule = RelaySchedule(s.M, s.K, N);
  run.source_power = Eigen::MatrixXd::Zero(s.M, N);
  run.relay_power = Eigen::MatrixXd::Zero(s.M, N);
  run.outcome.energy = Eigen::MatrixXd::Zero(s.K, N);
  return run;
}

void finish_run(const Scenario& s, SimRun& run) {
  SimOutcome& o = run.outcome;
  o.no_outage_ratio =
      1.0 - static_cast<double>(o.energy_outage_blocks) / (static_cast<double>(s.M) * s.total_blocks());
  o.max_source_power = run.source_power.size() > 0 ? run.source_power.maxCoeff() : 0.0;
}

void record(SimRun& run, int m, int k, int n, double p_source, double p_relay) {
  run.schedule.select(m, k, n);
  run.source_power(m, n) = p_source;
  run.relay_power(m, n) = p_relay;
}

// Active candidate with the largest stored energy per assigned power at the
// end of the previous block; ties go to the lowest relay index.
int max_surplus(const EnergyLedger& ledger, const Eigen::VectorXd& previous_end,
                const Eigen::VectorXd& p_row) {
  int best = -1;
  double best_ratio = -kInf;
  for (int k : active_set(ledger, p_row)) {
    const double ratio = previous_end(k) / p_row(k);
    if (ratio > best_ratio) {
      best = k;
      best_ratio = ratio;
    }
  }
  return best;
}

// Every pair schedules against the shared physical ledger in index order.
void schedule_blocks(const Scenario& s, const Eigen::MatrixXd& p_relay, double eta, int first,
                     int last, EnergyLedger& ledger, SimRun& run) {
  for (int n = first; n < last; ++n) {
    const Eigen::VectorXd previous_end = ledger.available();
    ledger.begin_block(n);
    for (int m = 0; m < s.M; ++m) {
      const Eigen::VectorXd row = p_relay.row(m).transpose();
      const int k = max_surplus(ledger, previous_end, row);
      if (k < 0) {
        ++run.outcome.energy_outage_blocks;
        continue;
      }
      ledger.debit(k, row(k));
      record(run, m, k, n, eta, row(k));
    }
    ledger.end_block();
    run.outcome.energy.col(n) = ledger.available();
  }
}

SimRun run_physical(const Scenario& s, const EhTrace& trace, const PolicyResult& policy) {
  SimRun run = start_run(s);
  EnergyLedger ledger(s, trace);
  schedule_blocks(s, policy.p_relay, policy.eta_star, 0, s.total_blocks(), ledger, run);
  run.outcome.witness_failures = run.outcome.energy_outage_blocks;
  finish_run(s, run);
  return run;
}

SimRun run_divided(const Scenario& s, const EhTrace& trace, const PolicyResult& policy,
                   const RelayDivision& division) {
  SimRun run = start_run(s);
  std::vector<EhTrace> child_traces;
  child_traces.reserve(s.M);
  for (int m = 0; m < s.M; ++m) child_traces.push_back(child_trace(division, trace, m));
  std::vector<EnergyLedger> children;
  children.reserve(s.M);
  for (int m = 0; m < s.M; ++m) children.emplace_back(s, child_traces[m]);
  EnergyLedger ledger(s, trace);

  for (int n = 0; n < s.total_blocks(); ++n) {
    std::vector<Eigen::VectorXd> previous_end;
    previous_end.reserve(s.M);
    for (auto& child : children) {
      previous_end.push_back(child.available());
      child.begin_block(n);
    }
    ledger.begin_block(n);
    for (int m = 0; m < s.M; ++m) {
      const Eigen::VectorXd row = policy.p_relay.row(m).transpose();
      const int k = max_surplus(children[m], previous_end[m], row);
      if (k < 0) {
        ++run.outcome.energy_outage_blocks;
        ++run.outcome.witness_failures;
        continue;
      }
      children[m].debit(k, row(k));
      ledger.debit(k, row(k));
      record(run, m, k, n, policy.eta_star, row(k));
    }
    for (auto& child : children) child.end_block();
    ledger.end_block();
    run.outcome.energy.col(n) = ledger.available();
  }
  finish_run(s, run);
  return run;
}

}  // namespace

std::vector<int> active_set(const EnergyLedger& ledger, const Eigen::VectorXd& p_relay_row) {
  std::vector<int> active;
  for (int k = 0; k < p_relay_row.size(); ++k) {
    const double p = p_relay_row(k);
    if (p > 0.0 && ledger.can_support(k, p)) active.push_back(k);
  }
  return active;
}

SimRun run_random_policy(const Scenario& s, const EhTrace& trace, const PolicyResult& policy,
                         Rng& rng) {
  SimRun run = start_run(s);
  EnergyLedger ledger(s, trace);
  for (int n = 0; n < s.total_blocks(); ++n) {
    ledger.begin_block(n);
    for (int m = 0; m < s.M; ++m) {
      const Eigen::VectorXd row = policy.p_relay.row(m).transpose();
      const std::vector<int> active = active_set(ledger, row);
      if (active.empty()) {
        ++run.outcome.energy_outage_blocks;
        continue;
      }
      const int k = active.size() == 1 ? active.front() : active[uniform_index(rng, active.size())];
      ledger.debit(k, row(k));
      record(run, m, k, n, policy.eta_star, row(k));
    }
    ledger.end_block();
    run.outcome.energy.col(n) = ledger.available();
  }
  finish_run(s, run);
  return run;
}

SimRun run_constructive_scheduler(const Scenario& s, const EhTrace& trace,
                                  const PolicyResult& policy) {
  if (s.M == 1) return run_physical(s, trace, policy);
  CandidateSets cand;
  cand.eta = policy.eta_star;
  cand.s_eta = policy.candidate_sets;
  cand.p_hat = policy.p_relay;
  const RelayDivision division = solve_relay_division(cand, trace, s);
  if (division.feasible) return run_divided(s, trace, policy, division);
  SimRun run = run_physical(s, trace, policy);
  run.outcome.relay_division = false;
  return run;
}

OnlineRun run_online_mode(const Scenario& s, const EhTrace& trace, const Utility& u,
                          const BisectOptions& opt) {
  OnlineRun online;
  online.run = start_run(s);
  try {
    online.offline_eta = bisect_eta(s, trace, u, opt).eta_star;
  } catch (const InfeasibleScenario&) {
    online.offline_eta = kInf;
  }

  EnergyLedger ledger(s, trace);
  EhTrace surrogate = trace;
  double eta_sum = 0.0;
  for (int j = 0; j < trace.intervals(); ++j) {
    for (int i = j; i < trace.intervals(); ++i) surrogate.psi.col(i) = trace.psi.col(j);
    double eta = kInf;
    Eigen::MatrixXd p_relay = Eigen::MatrixXd::Zero(s.M, s.K);
    try {
      const PolicyResult policy = bisect_eta(s, surrogate, u, opt);
      eta = policy.eta_star;
      p_relay = policy.p_relay;
    } catch (const InfeasibleScenario&) {
    }
    online.interval_eta.push_back(eta);
    eta_sum += eta;
    schedule_blocks(s, p_relay, eta, j * s.N_c, (j + 1) * s.N_c, ledger, online.run);
  }
  online.mean_eta = eta_sum / trace.intervals();
  finish_run(s, online.run);
  return online;
}

ScheduleCheck check_schedule(const Scenario& s, const EhTrace& trace, const Utility& u,
                             const SimRun& run) {
  ScheduleCheck check;
  const int N = s.total_blocks();
  const double half = s.T_c / 2.0;
  for (int n = 0; n < N; ++n) {
    for (int m = 0; m < s.M; ++m) {
      const int count = run.schedule.selections(m, n);
      if (count > 1) ++check.selection_violations;
      if (count == 0) continue;
      const int k = run.schedule.relay_for(m, n);
      if (u(m, k, run.source_power(m, n), run.relay_power(m, n)) < s.u_th - kQosTolerance) {
        ++check.qos_violations;
      }
    }
  }
  for (int k = 0; k < s.K; ++k) {
    double consumed = 0.0;
    double harvested = 0.0;  // through the end of the previous block
    for (int l = 0; l < N; ++l) {
      for (int m = 0; m < s.M; ++m) {
        if (run.schedule.selected(m, k, l)) consumed += run.relay_power(m, l) * half;
      }
      const double rate = trace.block_rate(k, l, s.N_c);
      const double budget = trace.e_init(k) + harvested + rate * half;
      if (consumed > budget + energy_tolerance(budget)) ++check.causality_violations;
      harvested += rate * s.T_c;
    }
  }
  return check;
}

std::string to_json(const SimOutcome& o) {
  nlohmann::json out;
  out["qos_violations"] = o.qos_violations;
  out["energy_outage_blocks"] = o.energy_outage_blocks;
  out["causality_violations"] = o.causality_violations;
  out["witness_failures"] = o.witness_failures;
  out["relay_division"] = o.relay_division;
  out["no_outage_ratio"] = o.no_outage_ratio;
  out["max_source_power"] = o.max_source_power;
  nlohmann::json energy = nlohmann::json::array();
  for (Eigen::Index k = 0; k < o.energy.rows(); ++k) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index n = 0; n < o.energy.cols(); ++n) row.push_back(o.energy(k, n));
    energy.push_back(row);
  }
  out["energy"] = energy;
  return out.dump(2);
}

void write_energy_csv(std::ostream& out, const SimOutcome& o) {
  out << "block,relay,joules\n";
  char buf[64];
  for (Eigen::Index n = 0; n < o.energy.cols(); ++n) {
    for (Eigen::Index k = 0; k < o.energy.rows(); ++k) {
      std::snprintf(buf, sizeof buf, "%ld,%ld,%.12g\n", static_cast<long>(n), static_cast<long>(k),
                    o.energy(k, n));
      out << buf;
    }
  }
}

}  // namespace ehrelay
