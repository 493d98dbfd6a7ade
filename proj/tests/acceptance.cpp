// Acceptance gate: one line per criterion, [PASS]/[FAIL], nonzero exit when
// anything fails.  Tolerances are pinned here on purpose; changing them is a
// release decision, not a refactor.  argv[1] names the CLI binary, exercised
// by the determinism criterion.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "loopsoup/capacity.hpp"
#include "loopsoup/errors.hpp"
#include "loopsoup/fixed_point.hpp"
#include "loopsoup/planar.hpp"
#include "loopsoup/rng.hpp"
#include "loopsoup/soup1d.hpp"
#include "loopsoup/special.hpp"
#include "oracles.hpp"

using namespace loopsoup;

namespace {

int g_failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %02d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

double ks_against(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  return oracles::ks_distance_sorted(sample, cdf);
}

// ---- shared state between the fixed-point criteria -------------------------

struct IterationCase {
  double theta = 0.0, alpha = 0.0;
  double sup_err = 0.0;
  double seconds = 0.0;
  GridFunction limit;
  IterationDiagnostics diag;
};

std::vector<IterationCase> g_iteration_cases;

void criterion_1() {
  const Timer timer;
  bool ok = std::fabs(f_infty(2.0, 0.5) - 0.5) <= 1e-10 &&
            std::fabs(f_infty(4.0, 0.5) - 1.0 / 3.0) <= 1e-10;
  for (double theta : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    ok = ok && std::fabs(f_infty(1.0, theta) - 1.0) <= 1e-12;
  }
  const double secs = timer.seconds();
  ok = ok && secs < 1.0;
  report(1, ok,
         "closed form: f(2;1/2)=" + num(f_infty(2.0, 0.5)) +
             ", f(4;1/2)=" + num(f_infty(4.0, 0.5)) + ", f(1;.)=1, " + num(secs) +
             "s (tol 1e-10 / 1e-12, budget 1s)");
}

void criterion_2() {
  const std::vector<std::pair<double, double>> cases = {
      {0.25, 0.5}, {0.5, 0.25}, {0.75, 0.1}};
  bool ok = true;
  std::string detail = "sup|iterate - exact| on [1,100]:";
  for (const auto& [theta, alpha] : cases) {
    const Timer timer;
    IterationCase c;
    c.theta = theta;
    c.alpha = alpha;
    const auto grid = make_crossing_grid(1e4, 200);
    auto [f, diag] = iterate_to_fixed_point(
        theta, alpha, constant_function(grid, 0.5, 0.0), 1e-12, 2000);
    c.diag = std::move(diag);
    const PchipEvaluator eval(f);
    for (double s = 1.0; s <= 100.0; s *= 1.01) {
      c.sup_err = std::max(c.sup_err, std::fabs(eval(s) - f_infty(s, theta)));
    }
    c.limit = std::move(f);
    c.seconds = timer.seconds();
    ok = ok && c.sup_err <= 1e-3 && c.seconds < 60.0;
    detail += " (theta=" + num(theta) + ") " + num(c.sup_err) + " in " +
              num(c.seconds) + "s";
    g_iteration_cases.push_back(std::move(c));
  }
  report(2, ok, detail + " (tol 1e-3, budget 60s each)");
}

void criterion_3() {
  bool ok = !g_iteration_cases.empty();
  std::string detail = "contraction ratios:";
  for (const auto& c : g_iteration_cases) {
    const double bound = lipschitz_constant(c.alpha, c.theta) * 1.05;
    double ratio = 0.0;
    bool case_ok = false;
    try {
      ratio = contraction_ratio(c.diag);
      case_ok = ratio <= bound;
    } catch (const InsufficientDataError&) {
    }
    ok = ok && case_ok;
    detail += " " + num(ratio) + "<=" + num(bound);
  }
  for (double theta : {0.25, 0.5}) {
    const auto rep = verify_bessel_fixed_point(theta, 1e4, 200);
    ok = ok && rep.max_residual <= 1e-6;
    detail += "; residual(theta=" + num(theta) + ")=" + num(rep.max_residual);
  }
  report(3, ok, detail + " (residual tol 1e-6)");
}

void criterion_4() {
  const auto grid = make_crossing_grid(1e3, 100);
  auto [f_super, diag_super] = iterate_to_fixed_point(
      1.2, -0.1, constant_function(grid, 0.5, 0.0), 1e-5, 2000);
  (void)diag_super;
  double sup_super = 0.0;
  for (double v : f_super.values) sup_super = std::max(sup_super, std::fabs(v - 1.0));

  // theta = 1/2 admits the constant solution exactly ...
  const auto one = constant_function(make_crossing_grid(1e4, 200), 1.0, 0.0);
  const auto Tone = apply_T(one, 0.5);
  double sup_one = 0.0;
  for (std::size_t i = 0; i < Tone.values.size(); ++i) {
    sup_one = std::max(sup_one, std::fabs(Tone.values[i] - 1.0));
  }

  // ... alongside the genuinely distinct subcritical profile (reusing the
  // converged iterate from the Banach criterion)
  bool distinct_ok = false;
  double at2 = 0.0, sup_gap = 0.0;
  for (const auto& c : g_iteration_cases) {
    if (c.theta != 0.5) continue;
    const PchipEvaluator eval(c.limit);
    at2 = eval(2.0);
    for (double v : c.limit.values) sup_gap = std::max(sup_gap, std::fabs(v - 1.0));
    distinct_ok = std::fabs(at2 - 0.5) <= 1e-3 && sup_gap > 0.3;
    break;
  }

  const bool ok = sup_super <= 1e-3 && sup_one <= 1e-10 && distinct_ok;
  report(4, ok,
         "supercritical collapse sup|f-1|=" + num(sup_super) +
             " (tol 1e-3); T(1)=1 at theta=1/2 to " + num(sup_one) +
             " (tol 1e-10); distinct fixed point f(2)=" + num(at2));
}

void criterion_5() {
  bool ok = true;
  std::string detail = "s^{1-theta} f -> A:";
  for (double theta : {0.25, 0.5, 0.75}) {
    const double A = f_infty_asymptotic_constant(theta);
    const double scaled = f_infty(1e4, theta) * std::pow(1e4, 1.0 - theta);
    const double rel = std::fabs(scaled / A - 1.0);
    ok = ok && rel <= 0.02;
    detail += " " + num(rel);

    const auto scan = tail_divergence_scan(theta, {1e2, 1e4});
    const double window = scan[1].second - scan[0].second;
    const double expected = A * std::log(100.0);
    const double wrel = std::fabs(window / expected - 1.0);
    ok = ok && wrel <= 0.05;
    detail += "/" + num(wrel);
  }
  report(5, ok, detail + " (rel tol 0.02 value, 0.05 log-window)");
}

void criterion_6() {
  const Timer timer;
  const auto est = covering_probability(0.5, 2.0, 1e-4, 100000, {606, 0});
  const double err = std::fabs(est.estimate - 0.5);
  bool ok = err <= 0.03;

  // vanishing cutoff only adds intervals, so coverage estimates rise
  const double eps_grid[3] = {1e-2, 1e-3, 1e-4};
  McEstimate sweep[3];
  for (int i = 0; i < 3; ++i) {
    sweep[i] = covering_probability(0.5, 2.0, eps_grid[i], 30000,
                                    {606, static_cast<std::uint64_t>(i + 1)});
  }
  for (int i = 0; i + 1 < 3; ++i) {
    const double slack =
        2.0 * std::hypot(sweep[i].std_error, sweep[i + 1].std_error);
    ok = ok && sweep[i].estimate <= sweep[i + 1].estimate + slack;
  }
  const double secs = timer.seconds();
  ok = ok && secs < 300.0;
  report(6, ok,
         "covering estimate " + num(est.estimate) + " (|err|=" + num(err) +
             " tol 0.03); sweep " + num(sweep[0].estimate) + " -> " +
             num(sweep[1].estimate) + " -> " + num(sweep[2].estimate) +
             " nondecreasing within 2 sigma; " + num(secs) + "s (budget 300s)");
}

void criterion_7() {
  const auto stat = last_uncovered_statistic(0.5, 3.0, 1e-4, 100000, {707, 0});
  const double ks =
      ks_against(stat.ratios, [](double t) { return arcsine_cdf(t, 0.5); });
  report(7, ks <= 0.02,
         "last uncovered point vs arcsine law: KS=" + num(ks) + " (tol 0.02, n=1e5, " +
             num(static_cast<double>(stat.clamped)) + " clamped)");
}

void criterion_8() {
  bool ok = true;
  std::string detail = "excursion death times KS:";
  int stream = 0;
  for (double theta : {0.25, 0.5}) {
    const auto deaths = excursion_death_time_samples(
        theta, 100000, {808, static_cast<std::uint64_t>(stream++)});
    const double ks = ks_against(
        deaths, [theta](double u) { return death_time_cdf(u, theta); });
    ok = ok && ks <= 0.01;
    detail += " " + num(ks);
  }

  const double theta = 0.5, x0 = 1.0, t = 1.0;
  const long n = 20000;
  std::vector<double> z;
  z.reserve(n);
  const RngStream base{808, 100};
  for (long i = 0; i < n; ++i) {
    z.push_back(besq_sample_path(theta, x0, {0.0, t}, base.replica(i)).values.back());
  }
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0, m4 = 0.0;
  for (double v : z) {
    const double d = v - mean;
    var += d * d;
    m4 += d * d * d * d;
  }
  var /= static_cast<double>(n - 1);
  m4 /= static_cast<double>(n);
  const double mean_target = x0 + 2.0 * theta * t;
  const double var_target = 4.0 * theta * t * t + 4.0 * x0 * t;
  const double se_mean = std::sqrt(var / static_cast<double>(n));
  const double se_var = std::sqrt(std::max(m4 - var * var, 0.0) / static_cast<double>(n));
  ok = ok && std::fabs(mean - mean_target) <= 3.0 * se_mean &&
       std::fabs(var - var_target) <= 3.0 * se_var;
  report(8, ok,
         detail + " (tol 0.01); squared Bessel moments mean " + num(mean) + " vs " +
             num(mean_target) + ", var " + num(var) + " vs " + num(var_target) +
             " (3 sigma)");
}

void criterion_9() {
  bool ok = true;
  // boundary normalization of the disc kernel, spectrally accurate trapezoid
  double worst_norm = 0.0;
  for (const Point2& x : {Point2{0.0, 0.0}, Point2{0.5, 0.2}, Point2{-0.7, 0.6}}) {
    const int m = 4096;
    double integral = 0.0;
    for (int k = 0; k < m; ++k) {
      const double a = 2.0 * M_PI * k / m;
      integral += disc_poisson_kernel(x, {std::cos(a), std::sin(a)});
    }
    integral *= 2.0 * M_PI / m;
    worst_norm = std::max(worst_norm, std::fabs(integral - 1.0));
  }
  ok = ok && worst_norm <= 1e-10;

  const double flat = std::fabs(annulus_inner_kernel_series(1e-4, M_PI).value /
                                    annulus_inner_kernel_series(1e-4, 0.0).value -
                                1.0);
  ok = ok && flat <= 0.05;

  // walk on spheres against the exact annulus hitting probability
  const std::pair<double, double> geoms[5] = {
      {0.2, 0.5}, {0.1, 0.3}, {0.05, 0.6}, {0.3, 0.35}, {0.15, 0.8}};
  double worst_pull = 0.0;
  for (int i = 0; i < 5; ++i) {
    const auto [r, z] = geoms[i];
    const auto est = wos_hitting_prob({z, 0.0}, {Disc{{0.0, 0.0}, r}},
                                      WosDomain{1.0, std::nullopt}, 200000,
                                      {909, static_cast<std::uint64_t>(i)});
    const double exact = bm_annulus_hit_inner(z, r, 1.0);
    worst_pull = std::max(worst_pull, std::fabs(est.estimate - exact) /
                                          std::max(est.std_error, 1e-12));
  }
  ok = ok && worst_pull <= 3.0;

  // two deep discs: leading-order pair-visit probability
  const double r_deep = std::exp(-30.0);
  long stuck = 0;
  const auto deep = wos_hitting_prob(
      {std::exp(-29.0), 0.0}, {Disc{{std::exp(-3.0), 0.0}, r_deep}},
      WosDomain{1.0, Disc{{0.0, 0.0}, r_deep}}, 10000000, {909, 50}, &stuck);
  const double target = 3.0 / 891.0;
  const double deep_rel = std::fabs(deep.estimate / target - 1.0);
  ok = ok && deep_rel <= 0.10;

  report(9, ok,
         "kernel normalization " + num(worst_norm) + " (tol 1e-10); flatness " +
             num(flat) + " (tol 0.05); WoS worst pull " + num(worst_pull) +
             " sigma (tol 3); deep two-disc rel err " + num(deep_rel) +
             " (tol 0.10, stuck=" + num(static_cast<double>(stuck)) + ")");
}

void criterion_10() {
  bool ok = true;
  const double acm_val = annulus_crossing_measure(std::exp(-4.0), std::exp(-1.0));
  ok = ok && std::fabs(acm_val - std::log(4.0 / 3.0)) <= 1e-12;

  const double r1 = 0.01, r2 = 0.5, h = 1e-6 * r1;
  const double fd = (annulus_crossing_measure(r1 + h, r2) -
                     annulus_crossing_measure(r1 - h, r2)) /
                    (2.0 * h);
  const double an = annulus_crossing_measure_dr1(r1, r2);
  const double drel = std::fabs(fd / an - 1.0);
  ok = ok && drel <= 1e-6;

  const Point2 x{0.0, 0.0}, y{std::exp(-3.0), 0.0};
  const double r = std::exp(-30.0);
  const double pair_mass = two_annuli_measure(x, y, r, r, 7.0);
  ok = ok && std::fabs(pair_mass - 0.01) <= 1e-12;
  const double pair_outer = two_annuli_measure_with_outer(x, y, r, r, std::exp(-1.0), 7.0);
  ok = ok && std::fabs(pair_outer - 5.0 / 900.0) <= 1e-12;

  report(10, ok,
         "annulus measure log(4/3) err " + num(std::fabs(acm_val - std::log(4.0 / 3.0))) +
             " (tol 1e-12); d/dr1 rel err " + num(drel) + " (tol 1e-6); two-disc mass " +
             num(pair_mass) + " vs 0.01 and " + num(pair_outer) +
             " vs 5/900 (tol 1e-12)");
}

void criterion_11() {
  bool ok = true;
  const double tau = tau_theta(0.8);
  const double trace = circle_heat_trace(tau);
  ok = ok && std::fabs(trace - 1.25) <= 1e-10;
  ok = ok && std::fabs(tau - 4.163) <= 1e-3;

  // trace decays in tau, so the root of trace = 1/theta grows with theta
  double prev_tau = 0.0;
  for (double theta : {0.6, 0.7, 0.8, 0.9}) {
    const double t = tau_theta(theta);
    ok = ok && t > prev_tau;
    prev_tau = t;
  }
  double prev_f = 0.0;
  for (double theta : {0.9, 0.95, 0.99}) {
    const double f = f_infty(2.0, theta);
    ok = ok && f > prev_f && f < 1.0;
    prev_f = f;
  }
  report(11, ok,
         "trace(tau(0.8))=" + num(trace) + " (tol 1e-10), tau=" + num(tau) +
             " (4.163 +- 1e-3); tau strictly increasing; f(2;theta) increasing toward 1");
}

void criterion_12() {
  bool ok = true;
  double worst = 0.0;
  for (double theta : {0.25, 0.5}) {
    for (int i = 0; i < 20; ++i) {
      const double s = std::pow(50.0, i / 19.0);
      for (int j = 0; j < 20; ++j) {
        const double t = std::pow(50.0, j / 19.0);
        const double defect =
            f_infty(s, theta) * f_infty(t, theta) - f_infty(s * t, theta);
        worst = std::max(worst, defect);
        ok = ok && defect <= 1e-10;
      }
    }
  }
  report(12, ok,
         "supermultiplicativity on the 20x20 grid [1,50]^2, theta in {1/4, 1/2}: "
         "max defect " + num(worst) + " (tol 1e-10)");
}

double brute_force_three_cloud(const PointCloud& cloud, double alpha, double h) {
  const auto E = [&](double w0, double w1) {
    w0 = std::clamp(w0, 0.0, 1.0);  // accumulated grid steps can overshoot by an ulp
    w1 = std::clamp(w1, 0.0, 1.0 - w0);
    WeightedMeasure m;
    m.weights = {w0, w1, 1.0 - w0 - w1};
    return energy(cloud, m, alpha, h);
  };
  double best = 1e300, b0 = 0.0, b1 = 0.0;
  const double coarse = 1e-3;
  for (double w0 = 0.0; w0 <= 1.0 + 1e-12; w0 += coarse) {
    const double cap = 1.0 - w0;
    for (double w1 = 0.0; w1 <= cap + 1e-12; w1 += coarse) {
      const double e = E(w0, std::min(w1, cap));
      if (e < best) {
        best = e;
        b0 = w0;
        b1 = std::min(w1, cap);
      }
    }
  }
  const double fine = 1e-5;
  for (double w0 = std::max(0.0, b0 - coarse); w0 <= std::min(1.0, b0 + coarse);
       w0 += fine) {
    for (double w1 = std::max(0.0, b1 - coarse);
         w1 <= std::min(1.0 - w0, b1 + coarse); w1 += fine) {
      best = std::min(best, E(w0, w1));
    }
  }
  return best;
}

void criterion_13() {
  bool ok = true;
  PhiloxEngine eng(1313, 0);
  double worst_gap = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    PointCloud cloud;
    cloud.resolution = 1e-3;
    for (int k = 0; k < 3; ++k) {
      cloud.points.push_back(
          {2.0 * eng.next_double() - 1.0, 2.0 * eng.next_double() - 1.0});
    }
    const double alpha = rep % 2 ? 1.0 : 0.5;
    const double fw = minimize_energy(cloud, alpha, cloud.resolution).energy;
    const double brute = brute_force_three_cloud(cloud, alpha, cloud.resolution);
    worst_gap = std::max(worst_gap, std::fabs(fw - brute));
  }
  ok = ok && worst_gap <= 1e-6;

  double worst_point = 0.0;
  for (double alpha : {0.5, 1.0, 2.0}) {
    for (double h : {1e-2, 1e-4}) {
      PointCloud one;
      one.points = {{0.3, -0.2}};
      one.resolution = h;
      const double expected = 1.0 / std::pow(std::fabs(std::log(h)), alpha);
      worst_point = std::max(
          worst_point, std::fabs(capacity(one, alpha, h) / expected - 1.0));
    }
  }
  ok = ok && worst_point <= 1e-12;

  bool mono_ok = true;
  for (int rep = 0; rep < 5; ++rep) {
    PointCloud small;
    small.resolution = 1e-3;
    for (int k = 0; k < 6 + rep; ++k) {
      small.points.push_back(
          {2.0 * eng.next_double() - 1.0, 2.0 * eng.next_double() - 1.0});
    }
    PointCloud large = small;
    for (int k = 0; k < 4; ++k) {
      large.points.push_back(
          {2.0 * eng.next_double() - 1.0, 2.0 * eng.next_double() - 1.0});
    }
    mono_ok = mono_ok &&
              capacity(large, 1.0, 1e-3) >= capacity(small, 1.0, 1e-3) - 1e-8;
    mono_ok = mono_ok &&
              capacity(small, 1.0, 1e-2) >= capacity(small, 1.0, 1e-3) - 1e-8 &&
              capacity(small, 1.0, 1e-3) >= capacity(small, 1.0, 1e-4) - 1e-8;
  }
  ok = ok && mono_ok;

  report(13, ok,
         "minimizer vs brute force worst gap " + num(worst_gap) +
             " (tol 1e-6, 20 clouds); single-point capacity rel err " +
             num(worst_point) + " (tol 1e-12); set/h monotonicity " +
             (mono_ok ? "holds" : "violated") + " (slack 1e-8)");
}

void criterion_14() {
  const Timer timer;
  bool ok = true;

  const std::vector<double> thetas = {0.3, 0.5, 0.8};
  const std::vector<std::pair<double, double>> annuli = {
      {0.35, 0.55}, {0.3, 0.6}, {0.25, 0.65}};
  SoupConfig cfg;
  const auto rows = crossing_probability_scan(thetas, annuli, cfg, 1000, {1414, 0});
  // thinning-coupled in theta and forest-shared across annuli: both
  // monotonicities hold replica by replica, so no statistical slack is needed
  bool mono_theta = true, mono_annulus = true;
  for (std::size_t a = 0; a < annuli.size(); ++a) {
    for (std::size_t t = 0; t + 1 < thetas.size(); ++t) {
      mono_theta = mono_theta &&
                   rows[t * annuli.size() + a].est.estimate <=
                       rows[(t + 1) * annuli.size() + a].est.estimate + 1e-12;
    }
  }
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    for (std::size_t a = 0; a + 1 < annuli.size(); ++a) {
      mono_annulus = mono_annulus &&
                     rows[t * annuli.size() + a + 1].est.estimate <=
                         rows[t * annuli.size() + a].est.estimate + 1e-12;
    }
  }
  ok = ok && mono_theta && mono_annulus;

  SoupConfig surround_cfg;
  surround_cfg.t_min = 0.005;
  const auto surround = surround_probability_scan(
      1.0, {0.03, 0.06, 0.09, 0.12}, surround_cfg, 1000, {1414, 1});
  double max_est = 0.0;
  for (const auto& row : surround.rows) max_est = std::max(max_est, row.est.estimate);
  ok = ok && surround.slope > 0.0 && max_est > 0.0;

  const auto fkg = fkg_spot_check(0.6, {0.3, 0.6}, {0.25, 0.65}, cfg, 1000, {1414, 2});
  const bool fkg_ok = fkg.covariance >= -3.0 * fkg.covariance_std_error;
  ok = ok && fkg_ok;

  const double secs = timer.seconds();
  ok = ok && secs < 600.0;
  report(14, ok,
         std::string("crossing monotone in theta: ") + (mono_theta ? "yes" : "no") +
             ", in annulus: " + (mono_annulus ? "yes" : "no") +
             "; surround slope " + num(surround.slope) + " > 0; FKG cov " +
             num(fkg.covariance) + " >= -3 sigma (" +
             num(fkg.covariance_std_error) + "); " + num(secs) + "s (budget 600s)");
}

// ---- criterion 15: bitwise determinism -------------------------------------

bool bits_equal(double a, double b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

bool vectors_bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!bits_equal(a[i], b[i])) return false;
  }
  return true;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_to_file(const std::string& cmd, const std::string& out_path) {
  const int status = std::system((cmd + " > " + out_path + " 2>/dev/null").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion_15(const char* cli_path) {
  bool ok = true;
  std::string detail;

  {
    const auto a = covering_probability(0.5, 2.0, 1e-2, 2000, {42, 7});
    const auto b = covering_probability(0.5, 2.0, 1e-2, 2000, {42, 7});
    ok = ok && bits_equal(a.estimate, b.estimate) && bits_equal(a.std_error, b.std_error);
  }
  {
    const auto a = last_uncovered_statistic(0.5, 2.0, 1e-2, 500, {42, 8});
    const auto b = last_uncovered_statistic(0.5, 2.0, 1e-2, 500, {42, 8});
    ok = ok && vectors_bits_equal(a.ratios, b.ratios) && a.clamped == b.clamped;
  }
  {
    const auto a = besq_sample_path(0.5, 1.0, {0.0, 0.5, 1.0}, {42, 9});
    const auto b = besq_sample_path(0.5, 1.0, {0.0, 0.5, 1.0}, {42, 9});
    ok = ok && vectors_bits_equal(a.values, b.values);
  }
  {
    const WosDomain dom{1.0, std::nullopt};
    const auto a = wos_hitting_prob({0.3, 0.0}, {Disc{{0.0, 0.0}, 0.1}}, dom, 5000, {42, 10});
    const auto b = wos_hitting_prob({0.3, 0.0}, {Disc{{0.0, 0.0}, 0.1}}, dom, 5000, {42, 10});
    ok = ok && bits_equal(a.estimate, b.estimate);
  }
  {
    SoupConfig cfg;
    const auto a = sample_loop_soup_2d(0.5, cfg, {42, 11});
    const auto b = sample_loop_soup_2d(0.5, cfg, {42, 11});
    bool same = a.loops.size() == b.loops.size() &&
                a.discarded_outside == b.discarded_outside;
    for (std::size_t i = 0; same && i < a.loops.size(); ++i) {
      same = a.loops[i].points.size() == b.loops[i].points.size() &&
             bits_equal(a.loops[i].duration, b.loops[i].duration);
      for (std::size_t k = 0; same && k < a.loops[i].points.size(); ++k) {
        same = bits_equal(a.loops[i].points[k].x, b.loops[i].points[k].x) &&
               bits_equal(a.loops[i].points[k].y, b.loops[i].points[k].y);
      }
    }
    ok = ok && same;
  }
  detail += std::string("in-process reruns bitwise identical: ") + (ok ? "yes" : "no");

  // the CLI round trip: identical bytes on disk and on stdout
  bool cli_ok = false;
  if (cli_path != nullptr) {
    char tmpl[] = "/tmp/loopsoup_acc_XXXXXX";
    const char* dir = mkdtemp(tmpl);
    if (dir != nullptr) {
      const std::string base(cli_path);
      const std::string d(dir);
      const std::string cover =
          base + " soup1d-cover --theta 0.5 --s 2 --epsilon 1e-2 --n 2000 --seed 4242";
      const int rc1 = std::system((cover + " --out " + d + "/a.csv >/dev/null 2>&1").c_str());
      const int rc2 = std::system((cover + " --out " + d + "/b.csv >/dev/null 2>&1").c_str());
      const std::string cross =
          base + " soup2d-cross --theta 0.5 --annuli 0.3:0.6 --n 100 --seed 77";
      const int rc3 = run_to_file(cross, d + "/x1.txt");
      const int rc4 = run_to_file(cross, d + "/x2.txt");
      const std::string a_csv = slurp(d + "/a.csv");
      cli_ok = rc1 == 0 && rc2 == 0 && rc3 == 0 && rc4 == 0 && !a_csv.empty() &&
               a_csv == slurp(d + "/b.csv") &&
               !slurp(d + "/x1.txt").empty() &&
               slurp(d + "/x1.txt") == slurp(d + "/x2.txt");
    }
  }
  ok = ok && cli_ok;
  detail += std::string("; CLI byte-compare (csv + stdout): ") + (cli_ok ? "yes" : "no");
  report(15, ok, detail);
}

}  // namespace

int main(int argc, char** argv) {
  const char* cli_path = argc > 1 ? argv[1] : nullptr;
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  criterion_12();
  criterion_13();
  criterion_14();
  criterion_15(cli_path);
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all 15 criteria passed\n");
  return 0;
}
