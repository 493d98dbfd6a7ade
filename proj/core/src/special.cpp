#include "loopsoup/special.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "loopsoup/errors.hpp"
#include "loopsoup/quadrature.hpp"

namespace loopsoup {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

[[noreturn]] void domain_fail(const char* fn, const char* msg) {
  throw std::domain_error(std::string(fn) + ": " + msg);
}

// ln|Gamma(x)| with the sign of Gamma(x); x may be negative non-integer.
struct SignedLogGamma {
  double log;
  int sign;
};

SignedLogGamma signed_log_gamma(double x) {
  if (x > 0.0) return {std::lgamma(x), 1};
  if (x == std::floor(x)) domain_fail("signed_log_gamma", "pole at nonpositive integer");
  const int sign = (static_cast<long long>(std::floor(x)) % 2 == 0) ? 1 : -1;
  return {std::lgamma(x), sign};
}

// Continued fraction for the incomplete beta (Lentz's method).
double beta_cf(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 3e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 400; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw ConvergenceError("regularized_beta: continued fraction did not settle");
}

double hyp2f1_series(double a, double b, double c, double z, long max_terms) {
  double term = 1.0;
  double sum = 1.0;
  for (long n = 0; n < max_terms; ++n) {
    term *= (a + n) * (b + n) / ((c + n) * (1.0 + n)) * z;
    sum += term;
    if (std::fabs(term) <= 1e-16 * std::fabs(sum)) return sum;
  }
  throw ConvergenceError("hyp2f1: series did not converge");
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) domain_fail("log_gamma", "requires x > 0");
  return std::lgamma(x);
}

double regularized_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) domain_fail("regularized_beta", "requires a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) domain_fail("regularized_beta", "requires x in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = a * std::log(x) + b * std::log1p(-x) -
                          (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(ln_front) * beta_cf(a, b, x) / a;
  }
  return 1.0 - std::exp(ln_front) * beta_cf(b, a, 1.0 - x) / b;
}

double hyp2f1(double a, double b, double c, double z) {
  if (!(c > 0.0)) domain_fail("hyp2f1", "requires c > 0");
  if (!(z >= 0.0 && z <= 1.0)) domain_fail("hyp2f1", "requires z in [0,1]");
  if (z == 0.0) return 1.0;

  if (z == 1.0) {
    if (!(c - a - b > 0.0)) domain_fail("hyp2f1", "z = 1 requires c - a - b > 0");
    const auto num1 = signed_log_gamma(c - a - b);
    const auto den1 = signed_log_gamma(c - a);
    const auto den2 = signed_log_gamma(c - b);
    const double lg = std::lgamma(c) + num1.log - den1.log - den2.log;
    return num1.sign * den1.sign * den2.sign * std::exp(lg);
  }

  if (z <= 0.75) return hyp2f1_series(a, b, c, z, 200000);

  // Euler integral; one of the upper parameters must lie strictly inside (0, c).
  double A, B;
  if (b > 0.0 && b < c) {
    A = a;
    B = b;
  } else if (a > 0.0 && a < c) {
    A = b;
    B = a;
  } else {
    return hyp2f1_series(a, b, c, z, 5000000);
  }
  const double pref = std::exp(std::lgamma(c) - std::lgamma(B) - std::lgamma(c - B));
  // split at 1/2 and reflect the upper half so each endpoint singularity sits
  // at a left endpoint, which the quadrature resolves without cancellation
  const double lower = tanh_sinh(
      [&](double t) {
        return std::pow(t, B - 1.0) * std::pow(1.0 - t, c - B - 1.0) *
               std::pow(1.0 - z * t, -A);
      },
      0.0, 0.5, 1e-14);
  const double upper = tanh_sinh(
      [&](double u) {
        return std::pow(u, c - B - 1.0) * std::pow(1.0 - u, B - 1.0) *
               std::pow((1.0 - z) + z * u, -A);
      },
      0.0, 0.5, 1e-14);
  return pref * (lower + upper);
}

double lipschitz_constant(double alpha, double theta) {
  if (!(theta > 0.0)) domain_fail("lipschitz_constant", "requires theta > 0");
  if (!(alpha > -theta && alpha < 1.0)) {
    domain_fail("lipschitz_constant", "requires alpha in (-theta, 1)");
  }
  return std::exp(std::lgamma(1.0 - alpha) + std::lgamma(alpha + theta) -
                  std::lgamma(theta));
}

double f_infty(double s, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) domain_fail("f_infty", "requires theta in (0,1)");
  if (!(s >= 1.0)) domain_fail("f_infty", "requires s >= 1");
  if (s == 1.0) return 1.0;
  return regularized_beta(1.0 - theta, theta, 1.0 / s);
}

double f_infty_asymptotic_constant(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) {
    domain_fail("f_infty_asymptotic_constant", "requires theta in (0,1)");
  }
  return std::sin(kPi * theta) / (kPi * (1.0 - theta));
}

double arcsine_density(double t, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) domain_fail("arcsine_density", "requires theta in (0,1)");
  if (!(t > 0.0 && t < 1.0)) domain_fail("arcsine_density", "requires t in (0,1)");
  return std::sin(kPi * theta) / kPi * std::pow(t, -theta) * std::pow(1.0 - t, theta - 1.0);
}

double arcsine_cdf(double t, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) domain_fail("arcsine_cdf", "requires theta in (0,1)");
  if (!(t >= 0.0 && t <= 1.0)) domain_fail("arcsine_cdf", "requires t in [0,1]");
  return regularized_beta(1.0 - theta, theta, t);
}

double death_time_cdf(double u, double theta) {
  if (!(theta > 0.0)) domain_fail("death_time_cdf", "requires theta > 0");
  if (!(u >= 0.0)) domain_fail("death_time_cdf", "requires u >= 0");
  if (u == 0.0) return 0.0;
  if (std::isinf(u)) return 1.0;
  return std::exp(theta * (std::log(u) - std::log1p(u)));
}

double circle_heat_trace(double t) {
  if (!(t > 0.0)) domain_fail("circle_heat_trace", "requires t > 0");
  // sum_{n in Z} exp(-n^2 t/2); for t < 1 sum the dual series in 2 pi^2 / t,
  // whose terms decay at least as fast.  Truncation bound:
  //   sum_{n > N} e^{-n^2 x} <= e^{-(N+1)^2 x} / (1 - e^{-(2N+3) x}).
  const bool dual = t < 1.0;
  const double x = dual ? 2.0 * kPi * kPi / t : 0.5 * t;
  const double pref = dual ? std::sqrt(2.0 * kPi / t) : 1.0;
  double sum = 1.0;
  for (int n = 1; n <= 64; ++n) {
    sum += 2.0 * std::exp(-static_cast<double>(n) * n * x);
    const double bound =
        2.0 * std::exp(-(n + 1.0) * (n + 1.0) * x) / (-std::expm1(-(2.0 * n + 3.0) * x));
    if (pref * bound <= 1e-15) return pref * sum;
  }
  throw ConvergenceError("circle_heat_trace: truncation bound not reached");
}

double tau_theta(double theta) {
  if (!(theta > 0.5 && theta < 1.0)) domain_fail("tau_theta", "requires theta in (1/2, 1)");
  const double target = 1.0 / theta;
  double lo = 0.5;  // trace(0.5) = 3.54 > 2 > target
  double hi = 4.0;
  while (circle_heat_trace(hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw ConvergenceError("tau_theta: bracketing failed");
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (circle_heat_trace(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace loopsoup
