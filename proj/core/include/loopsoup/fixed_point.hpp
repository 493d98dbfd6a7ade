#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace loopsoup {

// Function on a knot grid with a power-law tail model
//   f(s) = values.back() * (s / knots.back())^tail_exponent   for s > knots.back().
// Between knots it is the Fritsch-Carlson monotone cubic through the values.
struct GridFunction {
  std::vector<double> knots;   // strictly increasing, knots.front() == 1
  std::vector<double> values;  // same length, entries in [0,1]
  double tail_exponent = 0.0;  // <= 0

  void validate() const;  // throws std::invalid_argument
  std::size_t size() const { return knots.size(); }

  // Point evaluation; recomputes interpolation slopes per call.  Use
  // PchipEvaluator for bulk evaluation.
  double operator()(double s) const;
};

// Knot grid for crossing functions on [1, s_max]: log-spaced knots plus a
// geometric refinement of s-1 near the left endpoint, where d/ds has an
// integrable singularity.
std::vector<double> make_crossing_grid(double s_max, int knots_per_decade = 200);

GridFunction constant_function(std::vector<double> knots, double value,
                               double tail_exponent);

// Fritsch-Carlson slopes: the cubic through (x, y) with these endpoint
// derivatives is monotone on every panel where the data are.
std::vector<double> pchip_slopes(const std::vector<double>& x,
                                 const std::vector<double>& y);

class PchipEvaluator {
 public:
  explicit PchipEvaluator(const GridFunction& f);
  double operator()(double s) const;

 private:
  const GridFunction* f_;
  std::vector<double> slopes_;
};

struct ApplyStats {
  long clamp_count = 0;        // output values clipped into [0,1]
  double max_clamp_excess = 0.0;
};

// The crossing operator
//   (T f)(s) = 1 - (1 - 1/s)^theta
//              + theta (s-1)^theta int_1^inf (s + t - 1)^{-theta-1} f(t) dt,
// discretized by 3-point Gauss rules on the panels of a fixed knot grid plus a
// closed-form tail.  The kernel matrix depends only on (grid, theta), so one
// instance amortizes its construction over an entire iteration run.
class CrossingOperator {
 public:
  CrossingOperator(std::vector<double> knots, double theta, double tail_exponent);

  // f must live on this operator's grid with this operator's tail exponent.
  GridFunction apply(const GridFunction& f, ApplyStats* stats = nullptr) const;

  const std::vector<double>& knots() const { return knots_; }
  double theta() const { return theta_; }
  double tail_exponent() const { return tail_exponent_; }

 private:
  std::vector<double> knots_;
  double theta_;
  double tail_exponent_;
  std::vector<double> node_weight_;    // quadrature weight per node
  std::vector<int> node_panel_;        // panel index per node
  std::vector<double> node_basis_;     // 4 Hermite basis values per node
  std::vector<double> kernel_;         // knots x nodes, row-major
  std::vector<double> tail_factor_;    // per-knot tail integral at unit end value
};

// Convenience wrapper building a fresh operator for one application.
GridFunction apply_T(const GridFunction& f, double theta, ApplyStats* stats = nullptr);

// sup over the knots of s^alpha |f(s)|, extended by the tail model: +infinity
// when alpha + tail_exponent > 0 and the end value is nonzero.
double weighted_norm(const GridFunction& f, double alpha);

// Same norm applied to f - g; requires a shared grid.
double weighted_distance(const GridFunction& f, const GridFunction& g, double alpha);

struct IterationDiagnostics {
  std::vector<double> increments;  // weighted distance between consecutive iterates
  int iterations = 0;
  double final_residual = 0.0;     // weighted distance between T(limit) and limit
  double tol = 0.0;
  long clamp_count = 0;
  double max_clamp_excess = 0.0;
};

// Picard iteration of the crossing operator from `start` until the weighted
// increment drops below tol.  The start's tail exponent is replaced by the
// natural one for theta (theta - 1 subcritically, 0 otherwise).  Throws
// ConvergenceError when max_iter is exhausted first.
std::pair<GridFunction, IterationDiagnostics> iterate_to_fixed_point(
    double theta, double alpha, GridFunction start, double tol = 1e-12,
    int max_iter = 2000);

// Max ratio of consecutive increments over the window where both sides exceed
// the floor 10 * tol.  Throws InsufficientDataError on runs too short to
// support the estimate (< 3 increments, or first increment already at floor).
double contraction_ratio(const IterationDiagnostics& diag);

struct SupermultiplicativityRow {
  double s, t;
  double defect;  // f(s * t) - f(s) * f(t); >= 0 up to interpolation error
};
std::vector<SupermultiplicativityRow> check_supermultiplicative(
    const GridFunction& f, const std::vector<double>& s_values,
    const std::vector<double>& t_values);

// Partial integrals I(S) = int_1^S f_infty(s, theta) s^{-theta} ds at the given
// endpoints (increasing, all > 1).  Divergent as log S; see fit_against_log.
std::vector<std::pair<double, double>> tail_divergence_scan(
    double theta, const std::vector<double>& s_ends);

struct LogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_abs_residual = 0.0;
};

// Least squares fit value ~ slope * log s + intercept over the scan entries
// with s >= s_from.
LogFit fit_against_log(const std::vector<std::pair<double, double>>& scan,
                       double s_from);

struct BesselResidualReport {
  std::vector<double> knots;
  std::vector<double> f;    // f_infty on the knots
  std::vector<double> Tf;
  double max_residual = 0.0;  // max |Tf - f| over the knots
};

// Applies the crossing operator to the limit function itself; the residual
// measures the combined discretization and tail-model error.
BesselResidualReport verify_bessel_fixed_point(double theta, double s_max = 1e4,
                                               int knots_per_decade = 200);

}  // namespace loopsoup
