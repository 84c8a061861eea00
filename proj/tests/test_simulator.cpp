#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ehrelay/error.hpp"
#include "ehrelay/simulator.hpp"

using namespace ehrelay;

namespace {

// Single relay at peak power, with the source bound taken from the utility.
PolicyResult peak_policy(const Scenario& s, const Utility& u) {
  PolicyResult p;
  p.p_relay = Eigen::MatrixXd::Constant(1, 1, s.p_max);
  p.eta_star = source_power_for(u, 0, 0, s.u_th, s.p_max);
  p.p_source = Eigen::VectorXd::Constant(1, p.eta_star);
  p.candidate_sets = {{0}};
  return p;
}

Scenario one_relay(int n_c, int n_e) {
  Scenario s;
  s.K = 1;
  s.N_c = n_c;
  s.N_e = n_e;
  s.relay_positions = {{50, 50}};
  return s;
}

}  // namespace

TEST_CASE("active set examples") {
  Scenario s;
  s.K = 3;
  const EhTrace t = constant_trace(s, 0.02);
  EnergyLedger ledger(s, t);
  ledger.begin_block(0);
  Eigen::VectorXd row(3);
  row << 2.0, 0.0, 2.1;
  CHECK(active_set(ledger, row) == std::vector<int>{0});
  row << 1.0, 0.5, 2.02;
  CHECK(active_set(ledger, row) == std::vector<int>{0, 1, 2});
  row.setZero();
  CHECK(active_set(ledger, row).empty());
}

TEST_CASE("random policy is reproducible per seed") {
  Scenario s;
  s.K = 4;
  s.N_c = 10;
  s.N_e = 3;
  Rng place = make_rng(5, stream::placement);
  place_relays(s, place);
  Rng harvest = make_rng(5, stream::harvest);
  const EhTrace t = gen_eh_trace(s, harvest);
  PolicyResult p;
  p.eta_star = 1.0;
  p.p_source = Eigen::VectorXd::Constant(1, 1.0);
  p.p_relay = Eigen::MatrixXd::Constant(1, 4, 0.3);
  p.candidate_sets = {{0, 1, 2, 3}};

  Rng a = make_rng(9, stream::selection);
  Rng b = make_rng(9, stream::selection);
  Rng c = make_rng(10, stream::selection);
  const SimRun ra = run_random_policy(s, t, p, a);
  const SimRun rb = run_random_policy(s, t, p, b);
  const SimRun rc = run_random_policy(s, t, p, c);
  bool same_ab = true;
  bool same_ac = true;
  for (int n = 0; n < s.total_blocks(); ++n) {
    same_ab = same_ab && ra.schedule.relay_for(0, n) == rb.schedule.relay_for(0, n);
    same_ac = same_ac && ra.schedule.relay_for(0, n) == rc.schedule.relay_for(0, n);
  }
  CHECK(same_ab);
  CHECK_FALSE(same_ac);
  CHECK(ra.outcome.energy == rb.outcome.energy);
}

TEST_CASE("zeta of exactly one returns the battery to its initial charge each block") {
  const Scenario s = one_relay(5, 2);
  const EhTrace t = constant_trace(s, s.p_max / 2.0);
  const AfSuccessUtility u(s, compute_gains(s));
  const SimRun run = run_constructive_scheduler(s, t, peak_policy(s, u));
  CHECK(run.outcome.energy_outage_blocks == 0);
  CHECK(run.outcome.no_outage_ratio == 1.0);
  for (int n = 0; n < s.total_blocks(); ++n) {
    CHECK(run.outcome.energy(0, n) == doctest::Approx(s.initial_energy()).epsilon(1e-12));
  }
  // After the debit the relay holds one half-block of harvest.
  EnergyLedger ledger(s, t);
  ledger.begin_block(0);
  ledger.debit(0, s.p_max);
  CHECK(ledger.available(0) == doctest::Approx(t.psi(0, 0) * s.T_c / 2.0).epsilon(1e-12));
}

TEST_CASE("zeta below one eventually runs out of energy") {
  const Scenario s = one_relay(1000, 1);
  const EhTrace t = constant_trace(s, 0.45 * s.p_max);
  const AfSuccessUtility u(s, compute_gains(s));
  const SimRun run = run_constructive_scheduler(s, t, peak_policy(s, u));
  CHECK(run.outcome.energy_outage_blocks > 0);
  CHECK(run.outcome.causality_violations == 0);
  // Long-run service fraction equals the harvest-to-demand ratio 0.9.
  CHECK(run.outcome.no_outage_ratio == doctest::Approx(0.9).epsilon(0.01));
}

TEST_CASE("online mode on a flat trace matches the offline bound") {
  Scenario s;
  s.K = 4;
  s.N_c = 5;
  s.N_e = 3;
  s.eh_alpha = 0.0;
  Rng place = make_rng(2, stream::placement);
  place_relays(s, place);
  Rng harvest = make_rng(2, stream::harvest);
  const EhTrace t = gen_eh_trace(s, harvest);
  const AfSuccessUtility u(s, compute_gains(s));
  const OnlineRun online = run_online_mode(s, t, u);
  REQUIRE(online.interval_eta.size() == 3);
  for (double eta : online.interval_eta) CHECK(eta == doctest::Approx(online.offline_eta));
  CHECK(online.mean_eta == doctest::Approx(online.offline_eta));
  CHECK(online.run.outcome.no_outage_ratio == 1.0);
}

TEST_CASE("schedule checker replays a run and flags injected faults") {
  Scenario s;
  s.K = 5;
  s.N_c = 10;
  s.N_e = 3;
  Rng place = make_rng(4, stream::placement);
  place_relays(s, place);
  Rng harvest = make_rng(4, stream::harvest);
  const EhTrace t = gen_eh_trace(s, harvest);
  const AfSuccessUtility u(s, compute_gains(s));
  const PolicyResult policy = bisect_eta(s, t, u);
  SimRun run = run_constructive_scheduler(s, t, policy);
  const ScheduleCheck clean = check_schedule(s, t, u, run);
  CHECK(clean.causality_violations == 0);
  CHECK(clean.qos_violations == 0);
  CHECK(clean.selection_violations == 0);

  SimRun greedy_power = run;
  greedy_power.relay_power.setConstant(s.p_max);
  CHECK(check_schedule(s, t, u, greedy_power).causality_violations > 0);

  SimRun weak_source = run;
  weak_source.source_power *= 0.5;
  CHECK(check_schedule(s, t, u, weak_source).qos_violations > 0);

  SimRun doubled = run;
  const int k = doubled.schedule.relay_for(0, 0);
  doubled.schedule.select(0, (k + 1) % s.K, 0);
  CHECK(check_schedule(s, t, u, doubled).selection_violations == 1);
}

TEST_CASE("energy csv layout") {
  SimOutcome o;
  o.energy = Eigen::MatrixXd::Constant(2, 2, 0.5);
  std::ostringstream out;
  write_energy_csv(out, o);
  const std::string text = out.str();
  CHECK(text.rfind("block,relay,joules", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
  CHECK(to_json(o).find("\"no_outage_ratio\"") != std::string::npos);
}
