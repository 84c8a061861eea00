#include <cmath>
#include <limits>
#include <numbers>

#include "ehrelay/utility.hpp"

namespace ehrelay {

namespace {

// Ascending series, x <= 2:
//   K1(x) = 1/x + ln(x/2) I1(x) - (x/4) sum_k (psi(k+1) + psi(k+2)) (x^2/4)^k / (k! (k+1)!)
double k1_series(double x) {
  const double q = 0.25 * x * x;
  double weight = 1.0;  // (x^2/4)^k / (k! (k+1)!)
  double psi_k1 = -std::numbers::egamma;  // psi(k+1)
  double i1_sum = 0.0;
  double s_sum = 0.0;
  for (int k = 0; k < 60; ++k) {
    const double psi_k2 = psi_k1 + 1.0 / (k + 1);
    i1_sum += weight;
    s_sum += (psi_k1 + psi_k2) * weight;
    if (weight < 1e-18 * i1_sum) break;
    weight *= q / ((k + 1.0) * (k + 2.0));
    psi_k1 = psi_k2;
  }
  const double i1 = 0.5 * x * i1_sum;
  return 1.0 / x + std::log(0.5 * x) * i1 - 0.25 * x * s_sum;
}

// K1(x) = exp(-x) * int_0^inf exp(-x (cosh t - 1)) cosh t dt. The integrand
// is analytic and decays double-exponentially, so the trapezoid rule
// converges geometrically in 1/h.
double k1_quadrature(double x) {
  constexpr double h = 0.05;
  double sum = 0.5;
  for (int i = 1; i < 4000; ++i) {
    const double t = i * h;
    const double c = std::cosh(t);
    const double arg = x * (c - 1.0);
    if (arg > 45.0) break;
    sum += std::exp(-arg) * c;
  }
  return std::exp(-x) * h * sum;
}

}  // namespace

double bessel_k1(double x) {
  if (!(x > 0.0)) return std::numeric_limits<double>::infinity();
  if (x <= 2.0) return k1_series(x);
  return k1_quadrature(x);
}

}  // namespace ehrelay
