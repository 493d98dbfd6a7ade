#include "loopsoup/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "loopsoup/errors.hpp"
#include "loopsoup/quadrature.hpp"
#include "loopsoup/special.hpp"

namespace loopsoup {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// Hermite basis scaled so that value = b0 y0 + b1 m0 + b2 y1 + b3 m1 with
// slopes in original units.
void hermite_basis(double u, double h, double* b) {
  const double u2 = u * u;
  const double u3 = u2 * u;
  b[0] = 2.0 * u3 - 3.0 * u2 + 1.0;
  b[1] = (u3 - 2.0 * u2 + u) * h;
  b[2] = -2.0 * u3 + 3.0 * u2;
  b[3] = (u3 - u2) * h;
}

double tail_integral(double c, double theta, double beta, double S) {
  // int_S^inf (1 + c/t)^... written as int_S^inf (t + c)^{-theta-1} (t/S)^beta dt
  if (std::fabs(beta - (theta - 1.0)) < 1e-14) {
    if (c == 0.0) return std::pow(S, -theta);
    return std::pow(S, 1.0 - theta) * (-std::expm1(-theta * std::log1p(c / S))) /
           (theta * c);
  }
  if (beta == 0.0) return std::pow(S + c, -theta) / theta;
  // general beta < theta, via t = S / w
  const double val = tanh_sinh(
      [&](double w) {
        return std::pow(w, theta - beta - 1.0) * std::pow(1.0 + c * w / S, -theta - 1.0);
      },
      0.0, 1.0, 1e-12);
  return std::pow(S, -theta) * val;
}

}  // namespace

void GridFunction::validate() const {
  require(knots.size() >= 2, "GridFunction: need at least two knots");
  require(knots.size() == values.size(), "GridFunction: knots/values size mismatch");
  require(knots.front() == 1.0, "GridFunction: grid must start at s = 1");
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    require(knots[i] < knots[i + 1], "GridFunction: knots must increase strictly");
  }
  for (double v : values) {
    require(std::isfinite(v) && v >= 0.0 && v <= 1.0,
            "GridFunction: values must lie in [0,1]");
  }
  require(std::isfinite(tail_exponent) && tail_exponent <= 0.0,
          "GridFunction: tail exponent must be <= 0");
}

double GridFunction::operator()(double s) const { return PchipEvaluator(*this)(s); }

std::vector<double> make_crossing_grid(double s_max, int knots_per_decade) {
  require(s_max > 1.0, "make_crossing_grid: s_max must exceed 1");
  require(knots_per_decade >= 8, "make_crossing_grid: too few knots per decade");
  const double decades = std::log10(s_max);
  const long n = std::lround(std::ceil(decades * knots_per_decade));
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>(n) + 160);
  for (long i = 0; i < n; ++i) {
    g.push_back(std::pow(10.0, decades * static_cast<double>(i) / static_cast<double>(n)));
  }
  g.push_back(s_max);
  // refine s - 1 geometrically below the first log-spaced gap
  const double first_gap = g[1] - 1.0;
  const double ratio = std::pow(10.0, 1.0 / 24.0);
  for (double delta = 1e-7; delta < first_gap / ratio; delta *= ratio) {
    g.push_back(1.0 + delta);
  }
  std::sort(g.begin(), g.end());
  std::vector<double> out;
  out.reserve(g.size());
  for (double x : g) {
    if (out.empty() || x - out.back() > 1e-13 * x) out.push_back(x);
  }
  out.front() = 1.0;
  return out;
}

GridFunction constant_function(std::vector<double> knots, double value,
                               double tail_exponent) {
  GridFunction f;
  f.values.assign(knots.size(), value);
  f.knots = std::move(knots);
  f.tail_exponent = tail_exponent;
  f.validate();
  return f;
}

std::vector<double> pchip_slopes(const std::vector<double>& x,
                                 const std::vector<double>& y) {
  const std::size_t n = x.size();
  require(n >= 2 && y.size() == n, "pchip_slopes: need matching arrays, size >= 2");
  std::vector<double> m(n);
  if (n == 2) {
    m[0] = m[1] = (y[1] - y[0]) / (x[1] - x[0]);
    return m;
  }
  std::vector<double> h(n - 1), d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    d[i] = (y[i + 1] - y[i]) / h[i];
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] == 0.0 || d[i] == 0.0 || (d[i - 1] > 0.0) != (d[i] > 0.0)) {
      m[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }
  const auto endpoint = [](double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0.0) return 0.0;
    if ((d0 > 0.0) != (d1 > 0.0) && std::fabs(s) > 3.0 * std::fabs(d0)) return 3.0 * d0;
    return s;
  };
  m[0] = endpoint(h[0], h[1], d[0], d[1]);
  m[n - 1] = endpoint(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  return m;
}

PchipEvaluator::PchipEvaluator(const GridFunction& f)
    : f_(&f), slopes_(pchip_slopes(f.knots, f.values)) {}

double PchipEvaluator::operator()(double s) const {
  const auto& k = f_->knots;
  if (!(s >= k.front())) throw std::domain_error("PchipEvaluator: s below the grid");
  if (s >= k.back()) {
    return f_->values.back() * std::pow(s / k.back(), f_->tail_exponent);
  }
  const std::size_t p =
      static_cast<std::size_t>(std::upper_bound(k.begin(), k.end(), s) - k.begin()) - 1;
  const double h = k[p + 1] - k[p];
  double b[4];
  hermite_basis((s - k[p]) / h, h, b);
  return b[0] * f_->values[p] + b[1] * slopes_[p] + b[2] * f_->values[p + 1] +
         b[3] * slopes_[p + 1];
}

CrossingOperator::CrossingOperator(std::vector<double> knots, double theta,
                                   double tail_exponent)
    : knots_(std::move(knots)), theta_(theta), tail_exponent_(tail_exponent) {
  require(std::isfinite(theta) && theta > 0.0, "CrossingOperator: theta must be > 0");
  require(std::isfinite(tail_exponent) && tail_exponent <= 0.0,
          "CrossingOperator: tail exponent must be <= 0");
  require(knots_.size() >= 2 && knots_.front() == 1.0,
          "CrossingOperator: grid must start at 1");
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    require(knots_[i] < knots_[i + 1], "CrossingOperator: knots must increase strictly");
  }

  const std::size_t n = knots_.size();
  const std::size_t panels = n - 1;
  const std::size_t q_total = 3 * panels;
  node_weight_.resize(q_total);
  node_panel_.resize(q_total);
  node_basis_.resize(4 * q_total);
  std::vector<double> pos(q_total);
  for (std::size_t p = 0; p < panels; ++p) {
    const double a = knots_[p];
    const double b = knots_[p + 1];
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (int j = 0; j < 3; ++j) {
      const std::size_t q = 3 * p + j;
      pos[q] = mid + half * kGauss3Nodes[j];
      node_weight_[q] = half * kGauss3Weights[j];
      node_panel_[q] = static_cast<int>(p);
      hermite_basis((pos[q] - a) / (b - a), b - a, &node_basis_[4 * q]);
    }
  }

  kernel_.resize(n * q_total);
  for (std::size_t i = 0; i < n; ++i) {
    const double si = knots_[i];
    double* row = &kernel_[i * q_total];
    for (std::size_t q = 0; q < q_total; ++q) {
      row[q] = std::pow(si + pos[q] - 1.0, -theta_ - 1.0);
    }
  }

  const double S = knots_.back();
  tail_factor_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    tail_factor_[i] = tail_integral(knots_[i] - 1.0, theta_, tail_exponent_, S);
  }
}

GridFunction CrossingOperator::apply(const GridFunction& f, ApplyStats* stats) const {
  require(f.knots.size() == knots_.size() && std::equal(f.knots.begin(), f.knots.end(),
                                                        knots_.begin()),
          "CrossingOperator: grid mismatch");
  require(f.tail_exponent == tail_exponent_, "CrossingOperator: tail exponent mismatch");

  const std::size_t n = knots_.size();
  const std::size_t q_total = node_weight_.size();
  const std::vector<double> m = pchip_slopes(knots_, f.values);

  std::vector<double> fq(q_total);
  for (std::size_t q = 0; q < q_total; ++q) {
    const int p = node_panel_[q];
    const double* b = &node_basis_[4 * q];
    fq[q] = node_weight_[q] * (b[0] * f.values[p] + b[1] * m[p] +
                               b[2] * f.values[p + 1] + b[3] * m[p + 1]);
  }

  const double v_end = f.values.back();
  GridFunction out;
  out.knots = knots_;
  out.tail_exponent = tail_exponent_;
  out.values.assign(n, 0.0);
  out.values[0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double* row = &kernel_[i * q_total];
    double integral = 0.0;
    for (std::size_t q = 0; q < q_total; ++q) integral += row[q] * fq[q];
    integral += v_end * tail_factor_[i];
    const double si = knots_[i];
    double g = -std::expm1(theta_ * std::log1p(-1.0 / si)) +
               theta_ * std::pow(si - 1.0, theta_) * integral;
    if (g < 0.0) {
      if (stats) {
        ++stats->clamp_count;
        stats->max_clamp_excess = std::max(stats->max_clamp_excess, -g);
      }
      g = 0.0;
    } else if (g > 1.0) {
      if (stats) {
        ++stats->clamp_count;
        stats->max_clamp_excess = std::max(stats->max_clamp_excess, g - 1.0);
      }
      g = 1.0;
    }
    out.values[i] = g;
  }
  return out;
}

GridFunction apply_T(const GridFunction& f, double theta, ApplyStats* stats) {
  f.validate();
  CrossingOperator op(f.knots, theta, f.tail_exponent);
  return op.apply(f, stats);
}

double weighted_norm(const GridFunction& f, double alpha) {
  if (f.values.back() != 0.0 && alpha + f.tail_exponent > 0.0) return kInf;
  double sup = 0.0;
  for (std::size_t i = 0; i < f.knots.size(); ++i) {
    sup = std::max(sup, std::pow(f.knots[i], alpha) * std::fabs(f.values[i]));
  }
  return sup;
}

double weighted_distance(const GridFunction& f, const GridFunction& g, double alpha) {
  require(f.knots.size() == g.knots.size() &&
              std::equal(f.knots.begin(), f.knots.end(), g.knots.begin()),
          "weighted_distance: grid mismatch");
  require(f.tail_exponent == g.tail_exponent, "weighted_distance: tail mismatch");
  if (f.values.back() != g.values.back() && alpha + f.tail_exponent > 0.0) return kInf;
  double sup = 0.0;
  for (std::size_t i = 0; i < f.knots.size(); ++i) {
    sup = std::max(sup,
                   std::pow(f.knots[i], alpha) * std::fabs(f.values[i] - g.values[i]));
  }
  return sup;
}

std::pair<GridFunction, IterationDiagnostics> iterate_to_fixed_point(
    double theta, double alpha, GridFunction start, double tol, int max_iter) {
  require(std::isfinite(theta) && theta > 0.0, "iterate_to_fixed_point: theta > 0");
  require(alpha != 0.0 && alpha > -theta && alpha < 1.0,
          "iterate_to_fixed_point: alpha outside (-theta, 1) or zero");
  if (theta < 1.0) {
    require(alpha > 0.0 && alpha < 1.0 - theta,
            "iterate_to_fixed_point: need alpha in (0, 1 - theta) for theta < 1");
  } else if (theta > 1.0) {
    require(alpha > 1.0 - theta && alpha < 0.0,
            "iterate_to_fixed_point: need alpha in (1 - theta, 0) for theta > 1");
  }
  require(tol > 0.0 && max_iter >= 1, "iterate_to_fixed_point: bad tol or max_iter");
  start.tail_exponent = theta < 1.0 ? theta - 1.0 : 0.0;
  start.validate();

  CrossingOperator op(start.knots, theta, start.tail_exponent);
  IterationDiagnostics diag;
  diag.tol = tol;
  GridFunction f = std::move(start);
  for (int iter = 1; iter <= max_iter; ++iter) {
    ApplyStats st;
    GridFunction g = op.apply(f, &st);
    diag.clamp_count += st.clamp_count;
    diag.max_clamp_excess = std::max(diag.max_clamp_excess, st.max_clamp_excess);
    const double inc = weighted_distance(g, f, alpha);
    diag.increments.push_back(inc);
    diag.iterations = iter;
    f = std::move(g);
    if (inc <= tol) {
      diag.final_residual = weighted_distance(op.apply(f), f, alpha);
      return {std::move(f), std::move(diag)};
    }
  }
  throw ConvergenceError("iterate_to_fixed_point: increment still " +
                         std::to_string(diag.increments.back()) + " after " +
                         std::to_string(max_iter) + " iterations");
}

double contraction_ratio(const IterationDiagnostics& diag) {
  const auto& inc = diag.increments;
  const double floor = std::max(10.0 * diag.tol, 1e-300);
  if (inc.size() < 3 || !(inc.front() > floor)) {
    throw InsufficientDataError(
        "contraction_ratio: need >= 3 increments starting above 10 * tol");
  }
  double best = -kInf;
  int pairs = 0;
  for (std::size_t k = 0; k + 1 < inc.size(); ++k) {
    if (inc[k] >= floor && inc[k + 1] >= floor) {
      best = std::max(best, inc[k + 1] / inc[k]);
      ++pairs;
    }
  }
  if (pairs == 0) {
    throw InsufficientDataError("contraction_ratio: no increment pair above the floor");
  }
  return best;
}

std::vector<SupermultiplicativityRow> check_supermultiplicative(
    const GridFunction& f, const std::vector<double>& s_values,
    const std::vector<double>& t_values) {
  f.validate();
  const PchipEvaluator ev(f);
  std::vector<SupermultiplicativityRow> rows;
  rows.reserve(s_values.size() * t_values.size());
  for (double s : s_values) {
    require(s >= 1.0, "check_supermultiplicative: s >= 1 required");
    for (double t : t_values) {
      require(t >= 1.0, "check_supermultiplicative: t >= 1 required");
      rows.push_back({s, t, ev(s * t) - ev(s) * ev(t)});
    }
  }
  return rows;
}

std::vector<std::pair<double, double>> tail_divergence_scan(
    double theta, const std::vector<double>& s_ends) {
  require(!s_ends.empty(), "tail_divergence_scan: empty endpoint list");
  double prev = 1.0;
  double acc = 0.0;
  std::vector<std::pair<double, double>> out;
  out.reserve(s_ends.size());
  for (double S : s_ends) {
    require(S > prev, "tail_divergence_scan: endpoints must increase and exceed 1");
    acc += tanh_sinh([theta](double s) { return f_infty(s, theta) * std::pow(s, -theta); },
                     prev, S, 1e-10);
    prev = S;
    out.emplace_back(S, acc);
  }
  return out;
}

LogFit fit_against_log(const std::vector<std::pair<double, double>>& scan,
                       double s_from) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long n = 0;
  for (const auto& [s, v] : scan) {
    if (s < s_from) continue;
    const double x = std::log(s);
    sx += x;
    sy += v;
    sxx += x * x;
    sxy += x * v;
    ++n;
  }
  if (n < 2) throw InsufficientDataError("fit_against_log: need >= 2 points");
  const double denom = n * sxx - sx * sx;
  LogFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  for (const auto& [s, v] : scan) {
    if (s < s_from) continue;
    fit.max_abs_residual = std::max(
        fit.max_abs_residual, std::fabs(v - (fit.slope * std::log(s) + fit.intercept)));
  }
  return fit;
}

BesselResidualReport verify_bessel_fixed_point(double theta, double s_max,
                                               int knots_per_decade) {
  require(theta > 0.0 && theta < 1.0, "verify_bessel_fixed_point: theta in (0,1)");
  BesselResidualReport rep;
  rep.knots = make_crossing_grid(s_max, knots_per_decade);
  rep.f.reserve(rep.knots.size());
  for (double s : rep.knots) rep.f.push_back(f_infty(s, theta));
  GridFunction f{rep.knots, rep.f, theta - 1.0};
  CrossingOperator op(rep.knots, theta, theta - 1.0);
  rep.Tf = op.apply(f).values;
  for (std::size_t i = 0; i < rep.knots.size(); ++i) {
    rep.max_residual = std::max(rep.max_residual, std::fabs(rep.Tf[i] - rep.f[i]));
  }
  return rep;
}

}  // namespace loopsoup
