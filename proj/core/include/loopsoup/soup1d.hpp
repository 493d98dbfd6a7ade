#pragma once

#include <vector>

#include "loopsoup/mc.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

struct Interval {
  double a = 0.0, b = 0.0;  // a < b
};

// One draw of the scale-invariant interval soup with intensity
// theta (b-a)^{-2} da db on 0 < a < b, restricted to lengths >= cutoff and to
// intervals meeting the open window (window_lo, window_hi).
struct IntervalSoupSample {
  std::vector<Interval> intervals;
  double window_lo = 0.0, window_hi = 0.0;
  double cutoff = 0.0;
};

// Expected number of intervals in such a sample.
double soup_mass(double theta, double u, double v, double epsilon);

// Poisson draw: count ~ Poisson(soup_mass), lengths by exact inverse transform
// of the length marginal, left ends uniform given the length.
IntervalSoupSample sample_interval_soup(double theta, double u, double v,
                                        double epsilon, RngStream rng);

// Whether [p,q] is covered by the union of the sampled intervals.  Exact for
// the finite sample (sort by left end, sweep).  [p,q] must lie inside the
// sampled window.
bool covers_window(const IntervalSoupSample& sample, double p, double q);

// P([1,s] covered by the cutoff soup), by independent replicas on streams
// rng.replica(0..n-1).  The cutoff removes short intervals only, so the
// estimate is stochastically below the cutoff-free covering probability and
// increases as epsilon decreases.
McEstimate covering_probability(double theta, double s, double epsilon,
                                long n_replicas, RngStream rng);

// Last uncovered point of the window (delta0, s), one sample per replica,
// reported as ratios g/s.  Fully covered replicas clamp to g = delta0 and are
// counted in `clamped`.  delta0 <= 0 selects the default 10 * epsilon.
struct LastUncoveredSample {
  std::vector<double> ratios;
  double delta0 = 0.0;
  long clamped = 0;
};
LastUncoveredSample last_uncovered_statistic(double theta, double s, double epsilon,
                                             long n_replicas, RngStream rng,
                                             double delta0 = 0.0);

// Squared Bessel process of dimension 2*theta on the given time grid, exact
// transitions (Poisson-mixed gamma).  A leading t = 0 entry is added when the
// grid does not start at 0.
struct BesqPath {
  double dimension = 0.0;
  std::vector<double> times;
  std::vector<double> values;
};
BesqPath besq_sample_path(double theta, double x0, const std::vector<double>& time_grid,
                          RngStream rng);

// Death times of the scaled excursion: tau = G / (2 E) with G ~ Gamma(theta, 2),
// E ~ Exp(1); P(tau <= u) = (u / (1+u))^theta.
std::vector<double> excursion_death_time_samples(double theta, long n_samples,
                                                 RngStream rng);

// Survival function of the first passage of Brownian motion to -level,
// tabulated on t_grid: exact erf(level / sqrt(2 t)), a Monte Carlo estimate
// with Gaussian steps of size dt plus Brownian-bridge crossing correction, and
// the large-t asymptote level * sqrt(2 / (pi t)).
struct HittingTailRow {
  double t = 0.0;
  double exact = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double asymptotic = 0.0;
};
std::vector<HittingTailRow> bm_hitting_time_tail(double level,
                                                 const std::vector<double>& t_grid,
                                                 long n_paths, double dt, RngStream rng);

}  // namespace loopsoup
