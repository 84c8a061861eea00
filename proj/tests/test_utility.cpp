#include <doctest.h>

#include <cmath>

#include "ehrelay/error.hpp"
#include "ehrelay/utility.hpp"

using namespace ehrelay;

namespace {

// Frozen with mpmath.besselk(1, x) at 50 digits.
struct K1Reference {
  double x;
  double value;
};
constexpr K1Reference kK1[] = {
    {1e-6, 999999.99999278432422},      {1e-3, 999.99623815608555346},
    {0.05, 19.909674325882505397},      {0.5, 1.6564411200033008937},
    {1.0, 0.60190723019723457474},      {1.9, 0.15966015303266762929},
    {2.0, 0.13986588181652242728},      {2.1, 0.12274641153350789646},
    {3.0, 0.040156431128194184377},     {5.0, 0.0040446134454521642084},
    {10.0, 1.8648773453825584597e-5},   {25.0, 3.5327780731999337702e-12},
    {80.0, 2.5408531275211700109e-36},
};

Scenario single_pair() {
  Scenario s;
  s.K = 3;
  s.relay_positions = {{50, 50}, {30, 60}, {90, 50}};
  return s;
}

}  // namespace

TEST_CASE("Bessel K1 matches high-precision references") {
  for (const auto& ref : kK1) {
    CAPTURE(ref.x);
    CHECK(std::abs(bessel_k1(ref.x) / ref.value - 1.0) < 1e-10);
  }
}

TEST_CASE("direct link success and its inverse") {
  Scenario s;
  CHECK(direct_success(0.995, 1e-8, s) == doctest::Approx(0.99).epsilon(1e-4));
  CHECK(direct_success(1e12, 1e-8, s) == doctest::Approx(1.0));
  const double half = 1e-10 / (1e-8 * std::log(2.0));
  CHECK(direct_success(half, 1e-8, s) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(direct_success(1.0, 0.0, s) == 0.0);

  const double p = direct_power_for(0.99, 1e-8, s);
  CHECK(p == doctest::Approx(0.99499162473422).epsilon(1e-12));
  CHECK(direct_success(p, 1e-8, s) == doctest::Approx(0.99).epsilon(1e-6));
}

TEST_CASE("AF closed form: symmetry, limits and a frozen value") {
  CHECK(af_success_closed({100, 100, 0}, 1.0) == doctest::Approx(0.9793109625685124).epsilon(1e-12));
  CHECK(af_success_closed({37, 412, 0}, 1.0) == af_success_closed({412, 37, 0}, 1.0));
  CHECK(af_success_closed({100, 1e-12, 0}, 1.0) < 1e-9);
  CHECK(af_success_closed({100, 0, 0}, 1.0) == 0.0);
  CHECK(af_success_closed({100, 10, 0}, 0.0) == 1.0);
}

TEST_CASE("AF closed form is nondecreasing in both mean SNRs") {
  const int n = 100;
  auto grid = [](int i) { return std::pow(10.0, -1.0 + 6.0 * i / 99.0); };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double here = af_success_closed({grid(i), grid(j), 0}, 1.0);
      if (i + 1 < n) CHECK(af_success_closed({grid(i + 1), grid(j), 0}, 1.0) >= here - 1e-12);
      if (j + 1 < n) CHECK(af_success_closed({grid(i), grid(j + 1), 0}, 1.0) >= here - 1e-12);
    }
  }
}

TEST_CASE("AF Monte Carlo oracle") {
  Rng rng = make_rng(5, stream::fading);
  CHECK(af_success_mc({100, 100, 0}, 0.0, 10, rng) == 1.0);
  // A vanishing second hop makes a single draw fall below threshold.
  CHECK(af_success_mc({100, 1e-9, 0}, 1.0, 1, rng) == 0.0);

  // Exact-SNR success at Gamma1 = Gamma2 = 100, gamma = 1, from adaptive quadrature.
  const double exact = 0.9785590463364697;
  const double mc = af_success_mc({100, 100, 0}, 1.0, 1'000'000, rng);
  CHECK(std::abs(mc - exact) < 0.005);
  // The closed form describes the harmonic bound and overestimates the exact SNR.
  CHECK(af_success_closed({100, 100, 0}, 1.0) >= exact);
}

TEST_CASE("inverse relay power") {
  Scenario s = single_pair();
  const AfSuccessUtility u(s, compute_gains(s));
  const double eta = 1.5;
  const double p = inverse_relay_power(u, eta, 0, 0, s.u_th, s.p_max);
  CHECK(p > 0.0);
  CHECK(p <= s.p_max);
  CHECK(u(0, 0, eta, p) >= s.u_th);
  CHECK(u(0, 0, eta, p - 2 * kRelayPowerTolerance) < s.u_th);

  const double at_max = u(0, 0, eta, s.p_max);
  CHECK(inverse_relay_power(u, eta, 0, 0, at_max - 1e-13, s.p_max) ==
        doctest::Approx(s.p_max).epsilon(1e-6));

  CHECK_THROWS_AS(inverse_relay_power(u, eta, 0, 2, 0.999999, s.p_max), NotCandidate);

  // Doubling the relay-destination gain strictly lowers the required power.
  LinkGains g = compute_gains(s);
  LinkGains g2 = g;
  g2.relay_destination(0, 0) *= 2.0;
  const AfSuccessUtility u2(s, g2);
  const double p2 = inverse_relay_power(u2, eta, 0, 0, s.u_th, s.p_max);
  CHECK(p2 < p);
  // Grid oracle: the forward utility is monotone over relay power.
  double previous = 0.0;
  for (int i = 1; i <= 200; ++i) {
    const double v = u2(0, 0, eta, s.p_max * i / 200.0);
    CHECK(v >= previous);
    previous = v;
  }
}

TEST_CASE("inverse source power bounds") {
  Scenario s = single_pair();
  const AfSuccessUtility u(s, compute_gains(s));
  const double lo = inverse_source_power_lower(u, 0, 0, s.u_th, s.p_max);
  CHECK(lo > 0.0);
  CHECK(u(0, 0, lo, s.p_max) == doctest::Approx(s.u_th).epsilon(1e-9));

  const double inv = inverse_source_power_upper(u, 0, 0, s.u_th, 0.5);
  CHECK(inv > 0.0);
  CHECK(u(0, 0, 1.0 / inv, 0.5) == doctest::Approx(s.u_th).epsilon(1e-9));

  LinkGains dead = compute_gains(s);
  dead.relay_destination(0, 0) = 1e-30;
  const AfSuccessUtility ud(s, dead);
  CHECK(inverse_source_power_lower(ud, 0, 0, s.u_th, s.p_max) == 0.0);
  CHECK(inverse_source_power_upper(ud, 0, 0, s.u_th, 0.02) == 0.0);
}
