#ifndef EHRELAY_MODEL_HPP
#define EHRELAY_MODEL_HPP

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ehrelay/random.hpp"

namespace ehrelay {

// Index conventions used throughout the library:
//   pairs m and relays k are 0-based;
//   transmission blocks are 0-based (block n lies in interval n / N_c + 1);
//   EH intervals j are 1-based, because the cumulative-average and
//   feasibility formulas scale with j * N_c.

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Network geometry, radio constants and timing grid. SI units throughout.
struct Scenario {
  int M = 1;    ///< S-D pairs
  int K = 5;    ///< EH relays
  int N_c = 5;  ///< blocks per EH interval
  int N_e = 5;  ///< EH intervals
  double T_c = 0.01;
  double L_x = 100.0;
  double L_y = 100.0;
  double d0 = 10.0;
  double pl_ref_db = 60.0;
  double bandwidth_hz = 1e6;
  double noise_psd = 1e-16;
  double gamma_th = 1.0;
  double u_th = 0.99;
  double p_max = 2.0;
  double eh_mean = 0.02;
  double eh_alpha = 0.5;
  std::vector<Point> relay_positions;  ///< empty until placed
  std::uint64_t seed = 1;

  int total_blocks() const { return N_c * N_e; }
  double noise_power() const { return noise_psd * bandwidth_hz; }
  Point source(int m) const { return {0.0, (m + 1) * L_y / (M + 1)}; }
  Point destination(int m) const { return {L_x, (m + 1) * L_y / (M + 1)}; }
  /// 1-based EH interval containing 0-based block n.
  int interval_of(int block) const { return block / N_c + 1; }
  /// Energy that lets a relay transmit at peak power in every band once.
  double initial_energy() const { return M * p_max * T_c / 2.0; }
};

/// Throws ConfigError listing every violated invariant.
void validate(const Scenario& s);

/// Fills relay_positions with K i.i.d. uniform points in the field.
void place_relays(Scenario& s, Rng& rng);

/// Path gain 10^(-pl_ref_db/10) * (d0/d)^2. Throws GeometryError at d = 0.
double path_gain(Point a, Point b, const Scenario& s);

struct LinkGains {
  Eigen::MatrixXd source_relay;       ///< M x K
  Eigen::MatrixXd relay_destination;  ///< M x K
  Eigen::VectorXd direct;             ///< M
};

LinkGains compute_gains(const Scenario& s);

/// Per-relay, per-interval harvest rates plus initial battery energies.
struct EhTrace {
  Eigen::MatrixXd psi;     ///< K x N_e, watts
  Eigen::VectorXd e_init;  ///< K, joules

  int relays() const { return static_cast<int>(psi.rows()); }
  int intervals() const { return static_cast<int>(psi.cols()); }
  /// Harvest rate during 0-based block n.
  double block_rate(int k, int block, int n_c) const { return psi(k, block / n_c); }
};

EhTrace gen_eh_trace(const Scenario& s, Rng& rng);

/// Every relay harvests `rate` in every interval.
EhTrace constant_trace(const Scenario& s, double rate);

/// Mean of the first j interval rates of relay k (j is 1-based).
double cumulative_avg_rate(const EhTrace& trace, int k, int j);

/// z(m, k, n): relay k forwards for pair m in block n.
class RelaySchedule {
 public:
  RelaySchedule() = default;
  RelaySchedule(int pairs, int relays, int blocks)
      : pairs_(pairs), relays_(relays), blocks_(blocks),
        z_(static_cast<std::size_t>(pairs) * relays * blocks, 0) {}

  int pairs() const { return pairs_; }
  int relays() const { return relays_; }
  int blocks() const { return blocks_; }

  bool selected(int m, int k, int n) const { return z_[index(m, k, n)] != 0; }
  void select(int m, int k, int n) { z_[index(m, k, n)] = 1; }
  /// Selected relay for (m, n), or -1 when the pair was not served.
  int relay_for(int m, int n) const;
  int selections(int m, int n) const;

 private:
  std::size_t index(int m, int k, int n) const {
    return (static_cast<std::size_t>(n) * pairs_ + m) * relays_ + k;
  }

  int pairs_ = 0;
  int relays_ = 0;
  int blocks_ = 0;
  std::vector<std::uint8_t> z_;
};

struct Selection {
  int pair = 0;
  int relay = 0;
  double power = 0.0;  ///< relay transmit power in watts
};

/// Stored energy of every relay under the half-block timing of a
/// transmission block: sources transmit in the first half, relays in the
/// second, harvesting runs throughout.
class EnergyLedger {
 public:
  EnergyLedger(const Scenario& s, const EhTrace& trace);

  /// Credits the first half-block of harvest; moves to the relay stage.
  void begin_block(int block);
  /// Credits the second half-block of harvest.
  void end_block();

  /// Activity test at the relay stage.
  bool can_support(int k, double power) const;
  /// Debits power * T_c / 2. Throws CausalityViolation when it would go negative.
  void debit(int k, double power);

  double available(int k) const { return available_(k); }
  const Eigen::VectorXd& available() const { return available_; }
  int block() const { return block_; }
  bool in_relay_stage() const { return in_block_; }

 private:
  const EhTrace* trace_;
  double half_block_;
  int n_c_;
  int block_ = -1;
  bool in_block_ = false;
  Eigen::VectorXd available_;
};

/// One full block: half harvest, the given relay debits, half harvest.
/// Debits commute, so the result does not depend on selection order.
EnergyLedger ledger_step(EnergyLedger ledger, int block, std::span<const Selection> selections);

/// Slack the activity test allows for rounding in accumulated joules.
double energy_tolerance(double joules);

}  // namespace ehrelay

#endif  // EHRELAY_MODEL_HPP
