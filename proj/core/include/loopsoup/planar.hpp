#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "loopsoup/mc.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

struct Point2 {
  double x = 0.0, y = 0.0;
};

// Poisson kernel of the unit disc: density of harmonic measure seen from the
// interior point x, against arc length at the boundary point z.  Integrates
// to 1 over the circle.
double disc_poisson_kernel(const Point2& x, const Point2& z);

// P(Brownian motion from |z| = z_abs hits the circle of radius r before the
// circle of radius R), for 0 < r < z_abs < R.
double bm_annulus_hit_inner(double z_abs, double r, double R);

// Angular kernel of a crossing of the annulus q < |.| < 1, as a theta-type
// series in sech^2, with its first two angle derivatives (exact prefactors).
// n_terms = 0 picks the truncation automatically; either way the tail bound
// must certify a relative remainder below 1e-14.
struct AnnulusKernelValue {
  double value = 0.0;
  double d_angle = 0.0;
  double d2_angle = 0.0;
};
AnnulusKernelValue annulus_inner_kernel_series(double q, double angle, int n_terms = 0);

// Mass of the loop measure (unit intensity, loops confined to the unit disc)
// on loops crossing the annulus r1 < |.| < r2:
//   mu(r1, r2) = log( log(1/r1) / log(r2/r1) ),  0 < r1 < r2 < 1.
double annulus_crossing_measure(double r1, double r2);
double annulus_crossing_measure_dr1(double r1, double r2);

// P(some loop of the intensity-theta soup crosses the annulus)
//   = 1 - exp(-theta mu) = 1 - (log(r2/r1) / log(1/r1))^theta.
double single_loop_crossing_prob(double theta, double r1, double r2);

// Leading-order mass of loops visiting both the rx-disc at x and the ry-disc
// at y (small radii, |x-y| < 1):
//   (log |x-y|)^2 / (log(1/rx) log(1/ry)).
// The regime guard requires rx, ry <= |x-y|^A; outside it the leading-order
// formula is not meaningful and a RegimeError is thrown.
double two_annuli_measure(const Point2& x, const Point2& y, double rx, double ry,
                          double regime_A = 10.0);

// Same visit event for loops confined to the R-disc (A |x-y| <= R <= 1):
//   log(1/R) log(R / |x-y|^2) / (log(1/rx) log(1/ry)).
double two_annuli_measure_with_outer(const Point2& x, const Point2& y, double rx,
                                     double ry, double R, double regime_A = 10.0);

// Upper bound on the probability that clusters realize crossings to both
// small discs inside the R-disc, split over how the visits distribute across
// one, two, or three loops.
struct ThreeCrossingsBound {
  double single_loop = 0.0;        // one loop visits both discs
  double pair_bridge = 0.0;        // one loop visits both, a second brings scale R
  double pair_x_deep = 0.0;        // separate loops: deep visit at x, wide at y
  double pair_y_deep = 0.0;
  double triple = 0.0;             // three loops chained through the midscale
  double total() const {
    return single_loop + pair_bridge + pair_x_deep + pair_y_deep + triple;
  }
};
ThreeCrossingsBound three_crossings_bound(const Point2& x, const Point2& y, double rx,
                                          double ry, double R, double theta,
                                          double regime_A = 10.0);

// Walk on spheres in the disc of radius domain.outer_radius (absorbing), with
// an optional additional absorbing disc.  Success = reaching the boundary of
// any target disc.  Each boundary feature has a capture shell of 1e-6 times
// its radius; walks exceeding the step budget count as failures and are
// tallied through n_stuck when provided.
struct Disc {
  Point2 center;
  double radius = 0.0;
};
struct WosDomain {
  double outer_radius = 1.0;
  std::optional<Disc> inner_absorber;
};
McEstimate wos_hitting_prob(const Point2& start, const std::vector<Disc>& targets,
                            const WosDomain& domain, long n_walks, RngStream rng,
                            long* n_stuck = nullptr);

// Discretized Brownian loop: a closed bridge of n_steps Gaussian increments
// pinned at the anchor; `root` records the vertex of largest modulus.
struct LoopPath {
  Point2 root;
  double duration = 0.0;
  std::vector<Point2> points;  // n_steps + 1 vertices, first == last
  int n_steps = 0;
};

struct SoupConfig {
  double t_min = 1e-2;
  double t_max = 1.0;
  int n_steps = 64;              // >= 16
  double diam_min = 0.0;         // discard loops of smaller diameter
  double region_radius = 1.0;    // anchors sampled in this disc
  double proximity_delta = 0.0;  // cluster merge distance; 0 = 2 sqrt(t_max / n_steps)
};

LoopPath sample_loop(double duration, const Point2& anchor, int n_steps, RngStream rng);

// Poisson soup of loops: count ~ Poisson(theta * area * (1/2pi)(1/t_min - 1/t_max)),
// durations t^{-2}-distributed, anchors uniform.  Loops leaving the unit disc
// or of diameter below diam_min are discarded and counted.
struct LoopSoup2D {
  std::vector<LoopPath> loops;
  long discarded_outside = 0;
  long discarded_small = 0;
  double theta = 0.0;
  SoupConfig config;
};
LoopSoup2D sample_loop_soup_2d(double theta, const SoupConfig& cfg, RngStream rng);

// Union-find partition of loops: two loops join when some pair of their
// segments comes within proximity_delta.  Parents are fully flattened, so the
// labels are canonical for the given loop order.
struct ClusterForest {
  std::vector<int> parent;
  double proximity_delta = 0.0;
  int find(int i) const { return parent[static_cast<std::size_t>(i)]; }
  int n_clusters() const;
};
ClusterForest build_clusters(const std::vector<LoopPath>& loops, double proximity_delta);

// Whether some cluster reaches both inside radius r_in and outside r_out.
bool crossing_event(const ClusterForest& forest, const std::vector<LoopPath>& loops,
                    double r_in, double r_out);

// Cluster crossing frequencies over a grid of intensities and annuli, coupled
// by thinning: one soup per replica at max(thetas), loops kept for smaller
// theta by independent marks, so the estimates are monotone in theta replica
// by replica.  Annuli are evaluated on the same forests, so nested annuli are
// monotone as well.
struct CrossingScanRow {
  double theta = 0.0, r_in = 0.0, r_out = 0.0;
  McEstimate est;
};
std::vector<CrossingScanRow> crossing_probability_scan(
    const std::vector<double>& thetas,
    const std::vector<std::pair<double, double>>& annuli, const SoupConfig& cfg,
    long n_soups, RngStream rng);

// P(some single loop of the soup surrounds the r-disc: total winding about the
// origin at least 2 pi - 0.01 with no vertex inside radius r), over a grid of
// radii, with the least squares fit of log(1 - p) against log r.
struct SurroundRow {
  double r = 0.0;
  McEstimate est;
};
struct SurroundScan {
  std::vector<SurroundRow> rows;
  double slope = 0.0;      // expected positive: smaller disc, easier to surround
  double intercept = 0.0;
};
SurroundScan surround_probability_scan(double theta, const std::vector<double>& radii,
                                       const SoupConfig& cfg, long n_soups,
                                       RngStream rng);

// Covariance of two crossing events on the same soup.  Positive association up
// to Monte Carlo noise; the standard error is the empirical influence-function
// spread of the covariance estimator.
struct FkgReport {
  double p_first = 0.0, p_second = 0.0, p_both = 0.0;
  double covariance = 0.0;
  double covariance_std_error = 0.0;
  long n = 0;
};
FkgReport fkg_spot_check(double theta, std::pair<double, double> annulus_first,
                         std::pair<double, double> annulus_second,
                         const SoupConfig& cfg, long n_soups, RngStream rng);

}  // namespace loopsoup
