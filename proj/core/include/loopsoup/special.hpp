#pragma once

namespace loopsoup {

// ln Gamma(x) for x > 0.
double log_gamma(double x);

// Regularized incomplete beta function I_x(a,b), a,b > 0, x in [0,1].
double regularized_beta(double a, double b, double x);

// Gauss hypergeometric 2F1(a,b;c;z) for z in [0,1], c > 0.  Series for small z,
// the Euler integral representation near 1, the Gauss summation at z = 1.
double hyp2f1(double a, double b, double c, double z);

// c(alpha, theta) = Gamma(1-alpha) Gamma(alpha+theta) / Gamma(theta),
// the Lipschitz constant of the crossing operator in the s^alpha-weighted norm.
// Requires theta > 0 and alpha in (-theta, 1).
double lipschitz_constant(double alpha, double theta);

// Limit crossing probability f_infty(s, theta) = I_{1/s}(1-theta, theta)
// for s >= 1, theta in (0,1).  Decreasing in s, f_infty(1) = 1.
double f_infty(double s, double theta);

// A(theta) = sin(pi theta) / (pi (1-theta)): f_infty(s) ~ A(theta) s^{theta-1}.
double f_infty_asymptotic_constant(double theta);

// Generalized arcsine (Beta(1-theta, theta)) density and cdf on (0,1).
double arcsine_density(double t, double theta);
double arcsine_cdf(double t, double theta);

// Law of the scaled excursion death time: P(tau <= u) = (u/(1+u))^theta, u >= 0.
double death_time_cdf(double u, double theta);

// Heat kernel trace on the unit circle, sum_n exp(-n^2 t / 2), evaluated
// through the theta-function dual representation for t < 1 so that both
// branches carry a certified truncation error below 1e-14.
double circle_heat_trace(double t);

// The unique t with circle_heat_trace(t) = 1/theta, for theta in (1/2, 1).
// Bisection to absolute tolerance 1e-10.
double tau_theta(double theta);

}  // namespace loopsoup
