#include "ehrelay/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ehrelay/error.hpp"

namespace ehrelay {

void validate(const Scenario& s) {
  std::vector<std::string> problems;
  auto require = [&](bool ok, const char* what) {
    if (!ok) problems.emplace_back(what);
  };
  require(s.M >= 1, "M must be >= 1");
  require(s.K >= 1, "K must be >= 1");
  require(s.N_c >= 1, "N_c must be >= 1");
  require(s.N_e >= 1, "N_e must be >= 1");
  require(s.T_c > 0.0, "T_c must be positive (seconds)");
  require(s.L_x > 0.0 && s.L_y > 0.0, "L_x and L_y must be positive (meters)");
  require(s.d0 > 0.0, "d0 must be positive (meters)");
  require(std::isfinite(s.pl_ref_db), "pl_ref_db must be finite");
  require(s.bandwidth_hz > 0.0, "bandwidth_hz must be positive");
  require(s.noise_psd > 0.0, "noise_psd must be positive (W/Hz)");
  require(s.gamma_th >= 0.0, "gamma_th must be nonnegative");
  require(s.u_th > 0.0 && s.u_th < 1.0, "u_th must lie in (0, 1)");
  require(s.p_max > 0.0, "p_max must be positive (W)");
  require(s.eh_mean > 0.0, "eh_mean must be positive (W)");
  require(s.eh_alpha >= 0.0 && s.eh_alpha < 1.0, "eh_alpha must lie in [0, 1)");
  if (!s.relay_positions.empty() && static_cast<int>(s.relay_positions.size()) != s.K) {
    problems.emplace_back("relay_positions must list exactly K points");
  }
  for (const auto& p : s.relay_positions) {
    if (!(p.x >= 0.0 && p.x <= s.L_x && p.y >= 0.0 && p.y <= s.L_y)) {
      problems.emplace_back("relay_positions must lie inside the field");
      break;
    }
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

void place_relays(Scenario& s, Rng& rng) {
  s.relay_positions.clear();
  s.relay_positions.reserve(s.K);
  for (int k = 0; k < s.K; ++k) {
    const double x = uniform(rng, 0.0, s.L_x);
    const double y = uniform(rng, 0.0, s.L_y);
    s.relay_positions.push_back({x, y});
  }
}

double path_gain(Point a, Point b, const Scenario& s) {
  const double d = std::hypot(a.x - b.x, a.y - b.y);
  if (!(d > 0.0)) throw GeometryError();
  const double ratio = s.d0 / d;
  return std::pow(10.0, -s.pl_ref_db / 10.0) * ratio * ratio;
}

LinkGains compute_gains(const Scenario& s) {
  if (static_cast<int>(s.relay_positions.size()) != s.K) {
    throw ConfigError({"relay positions not placed"});
  }
  LinkGains g;
  g.source_relay.resize(s.M, s.K);
  g.relay_destination.resize(s.M, s.K);
  g.direct.resize(s.M);
  for (int m = 0; m < s.M; ++m) {
    g.direct(m) = path_gain(s.source(m), s.destination(m), s);
    for (int k = 0; k < s.K; ++k) {
      g.source_relay(m, k) = path_gain(s.source(m), s.relay_positions[k], s);
      g.relay_destination(m, k) = path_gain(s.relay_positions[k], s.destination(m), s);
    }
  }
  return g;
}

EhTrace gen_eh_trace(const Scenario& s, Rng& rng) {
  EhTrace t;
  t.psi.resize(s.K, s.N_e);
  const double lo = s.eh_mean * (1.0 - s.eh_alpha);
  const double hi = s.eh_mean * (1.0 + s.eh_alpha);
  for (int k = 0; k < s.K; ++k) {
    for (int j = 0; j < s.N_e; ++j) t.psi(k, j) = uniform(rng, lo, hi);
  }
  t.e_init = Eigen::VectorXd::Constant(s.K, s.initial_energy());
  return t;
}

EhTrace constant_trace(const Scenario& s, double rate) {
  EhTrace t;
  t.psi = Eigen::MatrixXd::Constant(s.K, s.N_e, rate);
  t.e_init = Eigen::VectorXd::Constant(s.K, s.initial_energy());
  return t;
}

double cumulative_avg_rate(const EhTrace& trace, int k, int j) {
  if (k < 0 || k >= trace.relays()) throw std::out_of_range("relay index out of range");
  if (j < 1 || j > trace.intervals()) throw std::out_of_range("EH interval out of range");
  double sum = 0.0;
  for (int i = 0; i < j; ++i) sum += trace.psi(k, i);
  return sum / j;
}

int RelaySchedule::relay_for(int m, int n) const {
  for (int k = 0; k < relays_; ++k) {
    if (selected(m, k, n)) return k;
  }
  return -1;
}

int RelaySchedule::selections(int m, int n) const {
  int count = 0;
  for (int k = 0; k < relays_; ++k) count += selected(m, k, n) ? 1 : 0;
  return count;
}

double energy_tolerance(double joules) {
  return 1e-9 * std::abs(joules) + 1e-18;
}

EnergyLedger::EnergyLedger(const Scenario& s, const EhTrace& trace)
    : trace_(&trace), half_block_(s.T_c / 2.0), n_c_(s.N_c), available_(trace.e_init) {}

void EnergyLedger::begin_block(int block) {
  if (in_block_ || block != block_ + 1) throw std::logic_error("ledger blocks must advance in order");
  block_ = block;
  in_block_ = true;
  for (int k = 0; k < available_.size(); ++k) {
    available_(k) += trace_->block_rate(k, block, n_c_) * half_block_;
  }
}

void EnergyLedger::end_block() {
  if (!in_block_) throw std::logic_error("end_block without begin_block");
  in_block_ = false;
  for (int k = 0; k < available_.size(); ++k) {
    available_(k) += trace_->block_rate(k, block_, n_c_) * half_block_;
  }
}

bool EnergyLedger::can_support(int k, double power) const {
  const double need = power * half_block_;
  return available_(k) + energy_tolerance(need) >= need;
}

void EnergyLedger::debit(int k, double power) {
  if (!in_block_) throw std::logic_error("relay debits happen inside a block");
  if (!can_support(k, power)) {
    throw CausalityViolation("energy causality violation: relay " + std::to_string(k) +
                             " in block " + std::to_string(block_));
  }
  available_(k) = std::max(0.0, available_(k) - power * half_block_);
}

EnergyLedger ledger_step(EnergyLedger ledger, int block, std::span<const Selection> selections) {
  // Canonical order makes the floating-point sums independent of input order.
  std::vector<Selection> sorted(selections.begin(), selections.end());
  std::sort(sorted.begin(), sorted.end(), [](const Selection& a, const Selection& b) {
    if (a.relay != b.relay) return a.relay < b.relay;
    if (a.pair != b.pair) return a.pair < b.pair;
    return a.power < b.power;
  });
  ledger.begin_block(block);
  for (std::size_t i = 0; i < sorted.size();) {
    const int k = sorted[i].relay;
    double total = 0.0;
    for (; i < sorted.size() && sorted[i].relay == k; ++i) total += sorted[i].power;
    ledger.debit(k, total);
  }
  ledger.end_block();
  return ledger;
}

}  // namespace ehrelay
