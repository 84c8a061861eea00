#ifndef EHRELAY_OPTIMIZER_HPP
#define EHRELAY_OPTIMIZER_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ehrelay/feasibility.hpp"
#include "ehrelay/lp.hpp"
#include "ehrelay/model.hpp"
#include "ehrelay/utility.hpp"

namespace ehrelay {

enum class Method { proposed, greedy, lp_bound, online };

std::string to_string(Method method);

struct Probe {
  double eta = 0.0;
  bool feasible = false;
};

struct PolicyResult {
  Method method = Method::proposed;
  double eta_star = 0.0;
  Eigen::VectorXd p_source;  ///< M
  Eigen::MatrixXd p_relay;   ///< M x K
  std::vector<std::vector<int>> candidate_sets;
  std::vector<Probe> probes;
  int qos_failures = 0;  ///< greedy: pair-blocks with no usable relay
};

struct BisectOptions {
  double epsilon = 1e-4;             ///< watts
  bool single_pair_shortcut = true;  ///< use the closed-form condition when M = 1
  int max_doublings = 40;
};

/// Search interval for the source power bound. `lo` never exceeds the
/// optimum of any schedule; `hi` passes the proposed feasibility check.
struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<Probe> probes;  ///< checks spent growing hi
};

/// Throws InfeasibleScenario when some pair has no usable relay or hi
/// stays infeasible after max_doublings.
Bracket initial_bracket(const Scenario& s, const EhTrace& trace, const Utility& u,
                        const BisectOptions& opt = {});

/// Relay-division feasibility at eta, the predicate the proposed policy bisects on.
bool proposed_feasible(double eta, const Scenario& s, const EhTrace& trace, const Utility& u,
                       const BisectOptions& opt = {});

PolicyResult bisect_eta(const Scenario& s, const EhTrace& trace, const Utility& u,
                        const BisectOptions& opt = {});
PolicyResult bisect_eta(const Scenario& s, const EhTrace& trace, const Utility& u,
                        const Bracket& bracket, const BisectOptions& opt = {});

struct GreedyRun {
  PolicyResult policy;
  RelaySchedule schedule;
  Eigen::MatrixXd source_power;  ///< M x N, +infinity on failed blocks
};

/// Per block and pair in index order, the relay needing the least source
/// power while spending all its stored energy up to peak power.
GreedyRun greedy_policy(const Scenario& s, const EhTrace& trace, const Utility& u);

inline constexpr long kLpBoundMaxVariables = 100'000;

/// Block-indexed relaxation of the selection problem at the candidate sets
/// of one eta: z(m, k, n) in [0, 1] for candidates only.
lp::Problem lp_relaxation(const CandidateSets& cand, const EhTrace& trace, const Scenario& s);

/// Feasibility of the relaxation. With one pair and the shortcut enabled it
/// uses the equivalent per-prefix capacity test instead of the LP.
bool relaxation_feasible(double eta, const Scenario& s, const EhTrace& trace, const Utility& u,
                         const BisectOptions& opt = {});

/// Single-pair relaxation test: the summed fractional capacity of the
/// candidates covers every block prefix.
bool single_pair_relaxation_feasible(const CandidateSets& cand, const EhTrace& trace,
                                     const Scenario& s);

/// Bisection on the relaxation. Throws SizeLimitExceeded past kLpBoundMaxVariables.
PolicyResult lp_bound(const Scenario& s, const EhTrace& trace, const Utility& u,
                      const BisectOptions& opt = {});
PolicyResult lp_bound(const Scenario& s, const EhTrace& trace, const Utility& u,
                      const Bracket& bracket, const BisectOptions& opt = {});

std::string to_json(const PolicyResult& result);

}  // namespace ehrelay

#endif  // EHRELAY_OPTIMIZER_HPP
