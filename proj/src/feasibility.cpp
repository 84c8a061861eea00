#include "ehrelay/feasibility.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace ehrelay {

bool CandidateSets::complete() const {
  for (const auto& set : s_eta) {
    if (set.empty()) return false;
  }
  return true;
}

CandidateSets preselect(double eta, const Utility& u, const Scenario& s) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  CandidateSets cand;
  cand.eta = eta;
  cand.s_eta.resize(s.M);
  cand.p_hat = Eigen::MatrixXd::Zero(s.M, s.K);
  for (int m = 0; m < s.M; ++m) {
    for (int k = 0; k < s.K; ++k) {
      if (u(m, k, eta, s.p_max) < s.u_th) continue;
      cand.p_hat(m, k) = inverse_relay_power(u, eta, m, k, s.u_th, s.p_max);
      cand.s_eta[m].push_back(k);
    }
  }
  return cand;
}

double zeta(const CandidateSets& cand, const EhTrace& trace, int l, const Scenario& s, int pair) {
  const auto& set = cand.s_eta.at(pair);
  if (set.empty()) return -std::numeric_limits<double>::infinity();
  const double blocks = static_cast<double>(l) * s.N_c;
  double steady = 0.0;
  double startup = 0.0;
  for (int k : set) {
    const double p = cand.p_hat(pair, k);
    steady += 2.0 * cumulative_avg_rate(trace, k, l) / p;
    startup += (2.0 * trace.e_init(k) / s.T_c - p) / (p * blocks);
  }
  return steady + startup;
}

bool theorem1_check(const CandidateSets& cand, const EhTrace& trace, const Scenario& s) {
  if (cand.pairs() != 1) throw std::invalid_argument("theorem1_check needs a single pair");
  for (int j = 1; j <= trace.intervals(); ++j) {
    if (!(zeta(cand, trace, j, s) >= 1.0)) return false;
  }
  return true;
}

double child_rate(double theta_tilde, const EhTrace& trace, int k, int j) {
  return cumulative_avg_rate(trace, k, j) * theta_tilde;
}

Fp6Instance build_fp6(const CandidateSets& cand, const EhTrace& trace, int j, const Scenario& s) {
  const int M = cand.pairs();
  const int K = cand.relays();
  Fp6Instance inst;
  inst.j = j;
  inst.pairs = M;
  inst.relays = K;
  inst.problem = lp::Problem(2 * M * K);
  for (int v = 0; v < inst.problem.n_vars; ++v) inst.problem.upper[v] = 1.0;

  const double blocks = static_cast<double>(j) * s.N_c;
  for (int m = 0; m < M; ++m) {
    const auto& set = cand.s_eta[m];
    if (set.empty()) inst.empty_candidate = true;
    // Divided through by j * N_c: sum_k (2 theta psi_bar / p + 2 phi E / (T_c j N_c p) - 1 / (j N_c)) >= 1.
    lp::Row& row = inst.problem.add_row(lp::Sense::greater_equal,
                                        1.0 + static_cast<double>(set.size()) / blocks);
    for (int k : set) {
      const double p = cand.p_hat(m, k);
      row.coeffs[inst.theta(m, k)] = 2.0 * cumulative_avg_rate(trace, k, j) / p;
      row.coeffs[inst.phi(m, k)] = 2.0 * trace.e_init(k) / (s.T_c * blocks * p);
    }
  }
  for (int k = 0; k < K; ++k) {
    lp::Row& row = inst.problem.add_row(lp::Sense::equal, 1.0);
    for (int m = 0; m < M; ++m) row.coeffs[inst.phi(m, k)] = 1.0;
  }
  for (int k = 0; k < K; ++k) {
    lp::Row& row = inst.problem.add_row(lp::Sense::equal, 1.0);
    for (int m = 0; m < M; ++m) row.coeffs[inst.theta(m, k)] = 1.0;
  }
  return inst;
}

void write(std::ostream& out, const Fp6Instance& instance) {
  out << "# relay division, interval " << instance.j << ", pairs " << instance.pairs
      << ", relays " << instance.relays << '\n';
  out << "# variables: phi(m,k) at m*K+k, theta(m,k) at M*K+m*K+k\n";
  out << "# rows: " << instance.pairs << " pair rows, " << instance.relays << " phi equalities, "
      << instance.relays << " theta equalities\n";
  lp::write(out, instance.problem);
}

bool check_all_intervals(const CandidateSets& cand, const EhTrace& trace, const Scenario& s) {
  if (!cand.complete()) return false;
  for (int j = 1; j <= trace.intervals(); ++j) {
    const Fp6Instance inst = build_fp6(cand, trace, j, s);
    if (!lp::feasible(inst.problem).feasible) return false;
  }
  return true;
}

RelayDivision solve_relay_division(const CandidateSets& cand, const EhTrace& trace,
                                   const Scenario& s) {
  const int M = cand.pairs();
  const int K = cand.relays();
  const int J = trace.intervals();
  RelayDivision out;
  if (!cand.complete()) return out;

  auto phi = [&](int m, int k) { return m * K + k; };
  auto theta = [&](int m, int k, int i) { return M * K + (m * K + k) * J + (i - 1); };
  lp::Problem p(M * K * (1 + J));

  for (int m = 0; m < M; ++m) {
    const auto& set = cand.s_eta[m];
    const double count = static_cast<double>(set.size());
    lp::Row& start = p.add_row(lp::Sense::greater_equal, count);
    for (int k : set) start.coeffs[phi(m, k)] = 2.0 * trace.e_init(k) / (s.T_c * cand.p_hat(m, k));
    for (int j = 1; j <= J; ++j) {
      const double blocks = static_cast<double>(j) * s.N_c;
      lp::Row& row = p.add_row(lp::Sense::greater_equal, 1.0 + count / blocks);
      for (int k : set) {
        const double ph = cand.p_hat(m, k);
        row.coeffs[phi(m, k)] = 2.0 * trace.e_init(k) / (s.T_c * blocks * ph);
        for (int i = 1; i <= j; ++i) row.coeffs[theta(m, k, i)] = 2.0 * trace.psi(k, i - 1) / (j * ph);
      }
    }
  }
  for (int k = 0; k < K; ++k) {
    lp::Row& row = p.add_row(lp::Sense::equal, 1.0);
    for (int m = 0; m < M; ++m) row.coeffs[phi(m, k)] = 1.0;
    for (int i = 1; i <= J; ++i) {
      lp::Row& share = p.add_row(lp::Sense::equal, 1.0);
      for (int m = 0; m < M; ++m) share.coeffs[theta(m, k, i)] = 1.0;
    }
  }

  const lp::Feasibility result = lp::feasible(p);
  if (!result.feasible) return out;
  out.feasible = true;
  out.phi = Eigen::MatrixXd::Zero(M, K);
  out.theta.assign(M, Eigen::MatrixXd::Zero(K, J));
  for (int k = 0; k < K; ++k) {
    // Renormalize away solver rounding so child energies sum exactly to the parent's.
    double phi_sum = 0.0;
    for (int m = 0; m < M; ++m) phi_sum += std::max(0.0, result.witness[phi(m, k)]);
    for (int m = 0; m < M; ++m) out.phi(m, k) = std::max(0.0, result.witness[phi(m, k)]) / phi_sum;
    for (int i = 1; i <= J; ++i) {
      double theta_sum = 0.0;
      for (int m = 0; m < M; ++m) theta_sum += std::max(0.0, result.witness[theta(m, k, i)]);
      for (int m = 0; m < M; ++m) {
        out.theta[m](k, i - 1) = std::max(0.0, result.witness[theta(m, k, i)]) / theta_sum;
      }
    }
  }
  return out;
}

EhTrace child_trace(const RelayDivision& division, const EhTrace& trace, int m) {
  EhTrace child;
  child.psi = trace.psi.cwiseProduct(division.theta.at(m));
  child.e_init = trace.e_init.cwiseProduct(division.phi.row(m).transpose());
  return child;
}

}  // namespace ehrelay
