#ifndef EHRELAY_FEASIBILITY_HPP
#define EHRELAY_FEASIBILITY_HPP

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "ehrelay/lp.hpp"
#include "ehrelay/model.hpp"
#include "ehrelay/utility.hpp"

namespace ehrelay {

/// Relay pre-selection at a source power bound eta.
struct CandidateSets {
  double eta = 0.0;
  std::vector<std::vector<int>> s_eta;  ///< per pair, ascending relay indices
  Eigen::MatrixXd p_hat;                ///< M x K minimum relay powers, 0 outside s_eta

  int pairs() const { return static_cast<int>(s_eta.size()); }
  int relays() const { return static_cast<int>(p_hat.cols()); }
  bool contains(int m, int k) const { return p_hat(m, k) > 0.0; }
  /// True when every pair has at least one candidate.
  bool complete() const;
};

/// Relays that reach u_th at peak power, each with its minimum relay power.
CandidateSets preselect(double eta, const Utility& u, const Scenario& s);

/// Sufficient-condition statistic of one pair in EH interval l (1-based).
/// Returns -infinity for an empty candidate set.
double zeta(const CandidateSets& cand, const EhTrace& trace, int l, const Scenario& s,
            int pair = 0);

/// min over intervals of zeta >= 1, for a single pair.
bool theorem1_check(const CandidateSets& cand, const EhTrace& trace, const Scenario& s);

/// Harvest rate a child relay sees: the parent's cumulative average scaled by its share.
double child_rate(double theta_tilde, const EhTrace& trace, int k, int j);

/// Relay-division feasibility program of one EH interval. Row order: one
/// QoS row per pair, then K initial-energy share equalities, then K
/// harvest share equalities. Variables are phi(m, k) followed by theta(m, k).
struct Fp6Instance {
  int j = 1;
  int pairs = 0;
  int relays = 0;
  bool empty_candidate = false;  ///< some pair has no candidate; infeasible as built
  lp::Problem problem;

  int phi(int m, int k) const { return m * relays + k; }
  int theta(int m, int k) const { return pairs * relays + m * relays + k; }
};

Fp6Instance build_fp6(const CandidateSets& cand, const EhTrace& trace, int j, const Scenario& s);

/// Plain-text dump of the instance: a comment header, then the LP.
void write(std::ostream& out, const Fp6Instance& instance);

/// Feasibility of the relay-division program for every EH interval.
bool check_all_intervals(const CandidateSets& cand, const EhTrace& trace, const Scenario& s);

/// One initial-energy share per child relay and one harvest share per child
/// relay and EH interval, jointly valid over the whole horizon.
struct RelayDivision {
  bool feasible = false;
  Eigen::MatrixXd phi;               ///< M x K
  std::vector<Eigen::MatrixXd> theta;  ///< per pair, K x N_e
};

/// Shares under which every pair meets the sufficient condition against its
/// own child relays at every interval boundary, including the first block.
RelayDivision solve_relay_division(const CandidateSets& cand, const EhTrace& trace,
                                   const Scenario& s);

/// Harvest trace of pair m's child relays.
EhTrace child_trace(const RelayDivision& division, const EhTrace& trace, int m);

}  // namespace ehrelay

#endif  // EHRELAY_FEASIBILITY_HPP
