#include "ehrelay/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ehrelay/error.hpp"

namespace ehrelay {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Bracket by doubling, then bisect on a relative tolerance.
constexpr double kSourceSearchStart = 1e-6;
constexpr double kSourceSearchCap = 1e9;
constexpr double kSourceRelTolerance = 1e-13;

}  // namespace

LinkStats link_stats(double p_src, double p_relay, const LinkGains& gains, int m, int k,
                     const Scenario& s) {
  const double n0b = s.noise_power();
  return {p_src * gains.source_relay(m, k) / n0b, p_relay * gains.relay_destination(m, k) / n0b,
          p_src * gains.direct(m) / n0b};
}

double direct_success(double p_src, double gain, const Scenario& s) {
  if (!(gain > 0.0) || !(p_src > 0.0)) return 0.0;
  return std::exp(-s.gamma_th * s.noise_power() / (p_src * gain));
}

double direct_power_for(double target, double gain, const Scenario& s) {
  if (!(target > 0.0 && target < 1.0)) throw std::domain_error("target must lie in (0, 1)");
  if (!(gain > 0.0)) return kInf;
  return s.gamma_th * s.noise_power() / (gain * -std::log(target));
}

double af_success_closed(const LinkStats& stats, double gamma_th) {
  if (gamma_th <= 0.0) return 1.0;
  const double g1 = stats.mean_snr_sr;
  const double g2 = stats.mean_snr_rd;
  if (!(g1 > 0.0) || !(g2 > 0.0)) return 0.0;
  const double x = 2.0 * gamma_th / std::sqrt(g1 * g2);
  const double xk1 = x > 0.0 ? x * bessel_k1(x) : 1.0;
  const double p = std::exp(-gamma_th * (1.0 / g1 + 1.0 / g2)) * xk1;
  return std::clamp(p, 0.0, 1.0);
}

double af_success_mc(const LinkStats& stats, double gamma_th, long n_draws, Rng& rng,
                     SnrModel model) {
  if (n_draws < 1) throw std::invalid_argument("n_draws must be >= 1");
  const double offset = model == SnrModel::exact ? 1.0 : 0.0;
  long hits = 0;
  for (long i = 0; i < n_draws; ++i) {
    const double g1 = exponential(rng, stats.mean_snr_sr);
    const double g2 = exponential(rng, stats.mean_snr_rd);
    const double denom = g1 + g2 + offset;
    const double snr = denom > 0.0 ? g1 * g2 / denom : 0.0;
    if (snr >= gamma_th) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n_draws);
}

AfSuccessUtility::AfSuccessUtility(const Scenario& s, LinkGains gains)
    : gamma_th_(s.gamma_th), noise_power_(s.noise_power()), gains_(std::move(gains)) {}

double AfSuccessUtility::operator()(int m, int k, double p_src, double p_relay) const {
  const LinkStats stats{p_src * gains_.source_relay(m, k) / noise_power_,
                        p_relay * gains_.relay_destination(m, k) / noise_power_,
                        p_src * gains_.direct(m) / noise_power_};
  return af_success_closed(stats, gamma_th_);
}

double inverse_relay_power(const Utility& u, double p_src, int m, int k, double target,
                           double p_max) {
  if (u(m, k, p_src, p_max) < target) {
    throw NotCandidate("relay " + std::to_string(k) + " cannot serve pair " + std::to_string(m) +
                       " at peak power");
  }
  double lo = 0.0;
  double hi = p_max;
  while (hi - lo > kRelayPowerTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (u(m, k, p_src, mid) >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double source_power_for(const Utility& u, int m, int k, double target, double p_relay) {
  if (!(p_relay > 0.0)) return kInf;
  double hi = kSourceSearchStart;
  while (u(m, k, hi, p_relay) < target) {
    hi *= 2.0;
    if (hi > kSourceSearchCap) return kInf;
  }
  double lo = hi == kSourceSearchStart ? 0.0 : 0.5 * hi;
  while (hi - lo > kSourceRelTolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    if (u(m, k, mid, p_relay) >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double inverse_source_power_lower(const Utility& u, int m, int k, double target, double p_max) {
  const double eta = source_power_for(u, m, k, target, p_max);
  return std::isfinite(eta) ? eta : 0.0;
}

double inverse_source_power_upper(const Utility& u, int m, int k, double target, double rate) {
  const double p_src = source_power_for(u, m, k, target, rate);
  return std::isfinite(p_src) ? 1.0 / p_src : 0.0;
}

}  // namespace ehrelay
