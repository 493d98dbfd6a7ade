#pragma once

#include <string>
#include <vector>

#include "loopsoup/planar.hpp"

namespace loopsoup {

// Finite point cloud standing in for a closed set discretized at scale
// `resolution`; the resolution doubles as the diagonal floor of the kernel.
struct PointCloud {
  std::vector<Point2> points;
  double resolution = 0.0;
  void validate() const;  // distinct points, resolution > 0
};

// Cloud generators for the standard test sets, all living in [-1,1]^2.
PointCloud segment_cloud(double h);                // unit segment, spacing ~h
PointCloud circle_cloud(double h);                 // unit circle, chord ~h
PointCloud cantor_cloud(double ratio, int level);  // self-similar dust, h = ratio^level

// True when the cloud is no finer than its declared resolution (some pair
// within `resolution`); a false return means the diagonal floor is doing work
// no off-diagonal entry can see, so h -> 0 trends should not rely on it.
bool resolution_consistent(const PointCloud& cloud);

// Probability weights on the points of a cloud.
struct WeightedMeasure {
  std::vector<double> weights;
  void validate() const;  // nonnegative, sum 1 within 1e-12
};

// |log(max(|p - q|, h))|^alpha: symmetric, finite on the diagonal.
double log_alpha_kernel(const Point2& p, const Point2& q, double alpha, double h);

// Quadratic energy sum_{ij} w_i w_j K(p_i, p_j).
double energy(const PointCloud& cloud, const WeightedMeasure& mu, double alpha,
              double h);

struct FrankWolfeConfig {
  double tol = 1e-10;      // duality gap at termination
  long max_iter = 200000;
};

struct MinimizeResult {
  WeightedMeasure measure;
  double energy = 0.0;
  double duality_gap = 0.0;    // max_j <grad, w - e_j>, an upper bound on E - E*
  double kkt_residual = 0.0;   // potential spread (Kw)_i over the support vs the min
  long iterations = 0;
  bool converged = false;
};

// Minimizes the energy over the simplex by Frank-Wolfe with away steps and
// exact line search.  Non-convergence within max_iter returns the best
// iterate with converged = false; the energy sequence is nonincreasing.
MinimizeResult minimize_energy(const PointCloud& cloud, double alpha, double h,
                               const FrankWolfeConfig& cfg = {});

// 1 / (minimal energy).
double capacity(const PointCloud& cloud, double alpha, double h,
                const FrankWolfeConfig& cfg = {});

// Capacity of the same set across a family of resolutions, per exponent, with
// a tail-to-head ratio classifying the h -> 0 trend.
struct CapacityTrendRow {
  double alpha = 0.0;
  std::vector<double> capacities;  // one per cloud, coarse to fine
  double ratio = 0.0;              // finest / coarsest
  std::string trend;               // "decaying_to_zero" | "bounded_below" | "indeterminate"
};

struct PolarityReport {
  std::vector<double> resolutions;  // strictly decreasing
  std::vector<CapacityTrendRow> rows;
  std::string criterion;  // how the trend feeds the cluster-hitting threshold
};

// Runs the minimizer over clouds representing one set at decreasing
// resolution.  Ratios below 0.3 classify as decaying, above 0.7 as bounded;
// the in-between band stays indeterminate, as does anything near the critical
// exponent, which the criterion text spells out.
PolarityReport polarity_diagnostic(const std::vector<PointCloud>& family,
                                   const std::vector<double>& alphas,
                                   const FrankWolfeConfig& cfg = {1e-8, 200000});

}  // namespace loopsoup
