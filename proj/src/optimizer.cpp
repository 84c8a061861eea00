#include "ehrelay/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include <json.hpp>

#include "ehrelay/error.hpp"

namespace ehrelay {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFallbackStart = 1e-6;

using Predicate = std::function<bool(double)>;

PolicyResult bisect(Method method, const Scenario& s, const Utility& u, const Bracket& bracket,
                    const BisectOptions& opt, const Predicate& feasible) {
  PolicyResult r;
  r.method = method;
  r.probes = bracket.probes;
  double lo = bracket.lo;
  double hi = bracket.hi;
  while (hi - lo > opt.epsilon) {
    const double mid = 0.5 * (lo + hi);
    const bool ok = feasible(mid);
    r.probes.push_back({mid, ok});
    if (ok) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const CandidateSets cand = preselect(hi, u, s);
  r.eta_star = hi;
  r.p_source = Eigen::VectorXd::Constant(s.M, hi);
  r.p_relay = cand.p_hat;
  r.candidate_sets = cand.s_eta;
  return r;
}

void check_size(const Scenario& s) {
  const long vars = static_cast<long>(s.M) * s.K * s.total_blocks();
  if (vars > kLpBoundMaxVariables) {
    throw SizeLimitExceeded("bound requires desk-scale N: " + std::to_string(vars) +
                            " relaxation variables exceed " +
                            std::to_string(kLpBoundMaxVariables));
  }
}

// Energy available to relay k at the relay stage of 0-based block b,
// in units of T_c / 2.
Eigen::MatrixXd stage_budgets(const EhTrace& trace, const Scenario& s) {
  const int K = trace.relays();
  const int N = s.total_blocks();
  Eigen::MatrixXd budget(K, N);
  for (int k = 0; k < K; ++k) {
    double joules = trace.e_init(k);
    for (int b = 0; b < N; ++b) {
      const double rate = trace.block_rate(k, b, s.N_c);
      budget(k, b) = (joules + rate * s.T_c / 2.0) / (s.T_c / 2.0);
      joules += rate * s.T_c;
    }
  }
  return budget;
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::proposed: return "proposed";
    case Method::greedy: return "greedy";
    case Method::lp_bound: return "lp_bound";
    case Method::online: return "online";
  }
  return "unknown";
}

bool proposed_feasible(double eta, const Scenario& s, const EhTrace& trace, const Utility& u,
                       const BisectOptions& opt) {
  const CandidateSets cand = preselect(eta, u, s);
  if (!cand.complete()) return false;
  if (s.M == 1 && opt.single_pair_shortcut) return theorem1_check(cand, trace, s);
  return check_all_intervals(cand, trace, s);
}

Bracket initial_bracket(const Scenario& s, const EhTrace& trace, const Utility& u,
                        const BisectOptions& opt) {
  Bracket b;
  // Each pair needs at least one relay reachable at peak power.
  for (int m = 0; m < s.M; ++m) {
    double pair_lo = kInf;
    for (int k = 0; k < s.K; ++k) {
      const double eta = inverse_source_power_lower(u, m, k, s.u_th, s.p_max);
      if (eta > 0.0) pair_lo = std::min(pair_lo, eta);
    }
    if (!std::isfinite(pair_lo)) {
      throw InfeasibleScenario("scenario infeasible: no relay can serve pair " +
                               std::to_string(m) + " even at peak relay power");
    }
    b.lo = std::max(b.lo, pair_lo);
  }

  double inv_upper = kInf;
  for (int k = 0; k < s.K; ++k) {
    double worst = 0.0;
    for (int m = 0; m < s.M; ++m) {
      for (int j = 0; j < trace.intervals(); ++j) {
        worst = std::max(worst, inverse_source_power_upper(u, m, k, s.u_th, trace.psi(k, j)));
      }
    }
    inv_upper = std::min(inv_upper, worst);
  }
  double hi = inv_upper > 0.0 && std::isfinite(inv_upper) ? 1.0 / inv_upper : kInf;
  if (!std::isfinite(hi)) hi = 2.0 * std::max(b.lo, kFallbackStart);
  hi = std::max(hi, b.lo);

  for (int doublings = 0;; ++doublings) {
    const bool ok = proposed_feasible(hi, s, trace, u, opt);
    b.probes.push_back({hi, ok});
    if (ok) break;
    if (doublings >= opt.max_doublings) {
      throw InfeasibleScenario("scenario infeasible at eta_U = " + std::to_string(hi) +
                               " W: too few relays or too poor channels");
    }
    b.lo = std::max(b.lo, hi);
    hi *= 2.0;
  }
  b.hi = hi;
  return b;
}

PolicyResult bisect_eta(const Scenario& s, const EhTrace& trace, const Utility& u,
                        const BisectOptions& opt) {
  return bisect_eta(s, trace, u, initial_bracket(s, trace, u, opt), opt);
}

PolicyResult bisect_eta(const Scenario& s, const EhTrace& trace, const Utility& u,
                        const Bracket& bracket, const BisectOptions& opt) {
  return bisect(Method::proposed, s, u, bracket, opt,
                [&](double eta) { return proposed_feasible(eta, s, trace, u, opt); });
}

GreedyRun greedy_policy(const Scenario& s, const EhTrace& trace, const Utility& u) {
  const int N = s.total_blocks();
  GreedyRun run;
  run.schedule = RelaySchedule(s.M, s.K, N);
  run.source_power = Eigen::MatrixXd::Constant(s.M, N, kInf);
  PolicyResult& r = run.policy;
  r.method = Method::greedy;
  r.p_relay = Eigen::MatrixXd::Zero(s.M, s.K);
  r.candidate_sets.resize(s.M);

  for (int m = 0; m < s.M; ++m) {
    for (int k = 0; k < s.K; ++k) {
      if (inverse_source_power_lower(u, m, k, s.u_th, s.p_max) > 0.0) r.candidate_sets[m].push_back(k);
    }
  }

  EnergyLedger ledger(s, trace);
  double eta = 0.0;
  for (int n = 0; n < N; ++n) {
    ledger.begin_block(n);
    for (int m = 0; m < s.M; ++m) {
      int best = -1;
      double best_source = kInf;
      double best_relay = 0.0;
      for (int k : r.candidate_sets[m]) {
        const double p_relay = std::min(s.p_max, 2.0 * ledger.available(k) / s.T_c);
        if (!(p_relay > 0.0)) continue;
        const double p_source = source_power_for(u, m, k, s.u_th, p_relay);
        if (p_source < best_source) {
          best = k;
          best_source = p_source;
          best_relay = p_relay;
        }
      }
      if (best < 0) {
        ++r.qos_failures;
        continue;
      }
      ledger.debit(best, best_relay);
      run.schedule.select(m, best, n);
      run.source_power(m, n) = best_source;
      r.p_relay(m, best) = std::max(r.p_relay(m, best), best_relay);
      eta = std::max(eta, best_source);
    }
    ledger.end_block();
  }
  r.eta_star = r.qos_failures > 0 ? kInf : eta;
  r.p_source = run.source_power.rowwise().maxCoeff();
  return run;
}

lp::Problem lp_relaxation(const CandidateSets& cand, const EhTrace& trace, const Scenario& s) {
  const int M = cand.pairs();
  const int K = cand.relays();
  const int N = s.total_blocks();

  // Column layout: block-major, then pair, then candidate relay.
  std::vector<int> first(static_cast<std::size_t>(N) * M + 1, 0);
  int vars = 0;
  for (int n = 0; n < N; ++n) {
    for (int m = 0; m < M; ++m) {
      first[static_cast<std::size_t>(n) * M + m] = vars;
      vars += static_cast<int>(cand.s_eta[m].size());
    }
  }
  auto column = [&](int m, int slot, int n) {
    return first[static_cast<std::size_t>(n) * M + m] + slot;
  };

  lp::Problem p(vars);
  const Eigen::MatrixXd budget = stage_budgets(trace, s);
  for (int k = 0; k < K; ++k) {
    bool used = false;
    for (int m = 0; m < M; ++m) used = used || cand.contains(m, k);
    if (!used) continue;
    for (int l = 0; l < N; ++l) {
      lp::Row& row = p.add_row(lp::Sense::less_equal, budget(k, l));
      for (int n = 0; n <= l; ++n) {
        for (int m = 0; m < M; ++m) {
          const auto& set = cand.s_eta[m];
          for (std::size_t slot = 0; slot < set.size(); ++slot) {
            if (set[slot] == k) row.coeffs[column(m, static_cast<int>(slot), n)] = cand.p_hat(m, k);
          }
        }
      }
    }
  }
  for (int n = 0; n < N; ++n) {
    for (int m = 0; m < M; ++m) {
      lp::Row& row = p.add_row(lp::Sense::equal, 1.0);
      for (std::size_t slot = 0; slot < cand.s_eta[m].size(); ++slot) {
        row.coeffs[column(m, static_cast<int>(slot), n)] = 1.0;
      }
    }
  }
  return p;
}

bool single_pair_relaxation_feasible(const CandidateSets& cand, const EhTrace& trace,
                                     const Scenario& s) {
  if (cand.pairs() != 1) throw std::invalid_argument("single pair relaxation needs M = 1");
  if (!cand.complete()) return false;
  const Eigen::MatrixXd budget = stage_budgets(trace, s);
  const double tol = lp::kFeasibilityTolerance;
  for (int l = 0; l < s.total_blocks(); ++l) {
    double capacity = 0.0;
    for (int k : cand.s_eta[0]) capacity += budget(k, l) / cand.p_hat(0, k);
    if (capacity < (l + 1) * (1.0 - tol)) return false;
  }
  return true;
}

bool relaxation_feasible(double eta, const Scenario& s, const EhTrace& trace, const Utility& u,
                         const BisectOptions& opt) {
  const CandidateSets cand = preselect(eta, u, s);
  if (!cand.complete()) return false;
  if (s.M == 1 && opt.single_pair_shortcut) return single_pair_relaxation_feasible(cand, trace, s);
  return lp::feasible(lp_relaxation(cand, trace, s)).feasible;
}

PolicyResult lp_bound(const Scenario& s, const EhTrace& trace, const Utility& u,
                      const BisectOptions& opt) {
  check_size(s);
  return lp_bound(s, trace, u, initial_bracket(s, trace, u, opt), opt);
}

PolicyResult lp_bound(const Scenario& s, const EhTrace& trace, const Utility& u,
                      const Bracket& bracket, const BisectOptions& opt) {
  check_size(s);
  return bisect(Method::lp_bound, s, u, bracket, opt,
                [&](double eta) { return relaxation_feasible(eta, s, trace, u, opt); });
}

std::string to_json(const PolicyResult& r) {
  using nlohmann::json;
  auto number = [](double v) -> json {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
  };
  json out;
  out["method"] = to_string(r.method);
  out["eta_star"] = number(r.eta_star);
  json source = json::array();
  for (Eigen::Index m = 0; m < r.p_source.size(); ++m) source.push_back(number(r.p_source(m)));
  out["p_source"] = source;
  json relay = json::array();
  for (Eigen::Index m = 0; m < r.p_relay.rows(); ++m) {
    json row = json::array();
    for (Eigen::Index k = 0; k < r.p_relay.cols(); ++k) row.push_back(r.p_relay(m, k));
    relay.push_back(row);
  }
  out["p_relay"] = relay;
  out["candidate_sets"] = r.candidate_sets;
  json probes = json::array();
  for (const Probe& p : r.probes) probes.push_back({{"eta", p.eta}, {"feasible", p.feasible}});
  out["probes"] = probes;
  out["qos_failures"] = r.qos_failures;
  return out.dump(2);
}

}  // namespace ehrelay
