#ifndef EHRELAY_UTILITY_HPP
#define EHRELAY_UTILITY_HPP

#include "ehrelay/model.hpp"
#include "ehrelay/random.hpp"

namespace ehrelay {

/// Modified Bessel function of the second kind, order 1, for x > 0.
double bessel_k1(double x);

/// Average received SNRs (linear) of the three links of one relayed pair.
struct LinkStats {
  double mean_snr_sr = 0.0;
  double mean_snr_rd = 0.0;
  double mean_snr_sd = 0.0;
};

LinkStats link_stats(double p_src, double p_relay, const LinkGains& gains, int m, int k,
                     const Scenario& s);

/// Rayleigh success probability of the unassisted source-destination link.
double direct_success(double p_src, double gain, const Scenario& s);

/// Smallest source power whose direct-link success reaches `target`.
double direct_power_for(double target, double gain, const Scenario& s);

/// Two-hop AF success probability, 1 - F(gamma_th), where F is the CDF of
/// the harmonic-mean SNR bound g1*g2/(g1+g2) with exponential g1, g2.
double af_success_closed(const LinkStats& stats, double gamma_th);

enum class SnrModel {
  exact,          ///< g1*g2/(g1+g2+1), the true AF end-to-end SNR
  harmonic_bound  ///< g1*g2/(g1+g2), the statistic of the closed form
};

/// Monte Carlo estimate of the AF success probability over Rayleigh fading.
double af_success_mc(const LinkStats& stats, double gamma_th, long n_draws, Rng& rng,
                     SnrModel model = SnrModel::exact);

/// QoS utility U_{m,k}(p_src, p_relay). Only monotone nondecreasing
/// utilities are meaningful to the solvers below.
class Utility {
 public:
  virtual ~Utility() = default;
  virtual double operator()(int m, int k, double p_src, double p_relay) const = 0;
  virtual int pairs() const = 0;
  virtual int relays() const = 0;
};

/// Successful transmission probability of a single AF relay over Rayleigh fading.
class AfSuccessUtility final : public Utility {
 public:
  AfSuccessUtility(const Scenario& s, LinkGains gains);

  double operator()(int m, int k, double p_src, double p_relay) const override;
  int pairs() const override { return static_cast<int>(gains_.source_relay.rows()); }
  int relays() const override { return static_cast<int>(gains_.source_relay.cols()); }
  const LinkGains& gains() const { return gains_; }

 private:
  double gamma_th_;
  double noise_power_;
  LinkGains gains_;
};

inline constexpr double kRelayPowerTolerance = 1e-9;

/// Smallest relay power in [0, p_max] meeting `target`, to kRelayPowerTolerance.
/// Throws NotCandidate when the target is unreachable at p_max.
double inverse_relay_power(const Utility& u, double p_src, int m, int k, double target,
                           double p_max);

/// Source power solving target = U(eta, p_max); 0 when no source power suffices.
double inverse_source_power_lower(const Utility& u, int m, int k, double target, double p_max);

/// Reciprocal-form root eta^U_{m,k,j} of target = U(1 / eta, rate); 0 when no
/// source power suffices.
double inverse_source_power_upper(const Utility& u, int m, int k, double target, double rate);

/// Smallest source power meeting `target` with the relay at `p_relay`;
/// +infinity when unreachable.
double source_power_for(const Utility& u, int m, int k, double target, double p_relay);

}  // namespace ehrelay

#endif  // EHRELAY_UTILITY_HPP
