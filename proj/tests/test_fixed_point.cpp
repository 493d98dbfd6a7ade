#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "loopsoup/errors.hpp"
#include "loopsoup/fixed_point.hpp"
#include "loopsoup/special.hpp"
#include "oracles.hpp"

using namespace loopsoup;

TEST_CASE("crossing grid shape") {
  const auto grid = make_crossing_grid(1e4, 200);
  CHECK(grid.front() == 1.0);
  CHECK(grid.back() == doctest::Approx(1e4).epsilon(1e-12));
  CHECK(std::is_sorted(grid.begin(), grid.end()));
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
  // refinement near s = 1: the first gap is far below the plain log spacing
  CHECK(grid[1] - grid[0] < 1e-6);
  CHECK_THROWS_AS((void)make_crossing_grid(0.5, 200), std::invalid_argument);
  CHECK_THROWS_AS((void)make_crossing_grid(100.0, 0), std::invalid_argument);
}

TEST_CASE("pchip interpolation") {
  GridFunction f;
  f.knots = {1.0, 2.0, 3.0, 5.0, 8.0};
  f.values = {1.0, 0.7, 0.5, 0.3, 0.2};
  f.tail_exponent = -1.0;
  const PchipEvaluator eval(f);
  for (std::size_t i = 0; i < f.knots.size(); ++i) {
    CHECK(eval(f.knots[i]) == doctest::Approx(f.values[i]).epsilon(1e-15));
  }
  // monotone data stay monotone through the interpolant
  double prev = eval(1.0);
  for (double s = 1.0; s <= 8.0; s += 0.01) {
    const double v = eval(s);
    CHECK(v <= prev + 1e-12);
    prev = v;
  }
  // beyond the last knot the tail model takes over: f(end) * (s/end)^beta
  CHECK(eval(16.0) == doctest::Approx(0.2 * 8.0 / 16.0).epsilon(1e-12));
}

TEST_CASE("constant one is a fixed point of the operator") {
  const auto grid = make_crossing_grid(1e3, 100);
  for (double theta : {0.5, 0.8, 1.2}) {
    const auto one = constant_function(grid, 1.0, 0.0);
    const auto Tone = apply_T(one, theta);
    double sup = 0.0;
    for (std::size_t i = 0; i < Tone.values.size(); ++i) {
      sup = std::max(sup, std::fabs(Tone.values[i] - 1.0));
    }
    CHECK(sup < 1e-10);
  }
}

TEST_CASE("operator quadrature against an independent integrator") {
  // (T f)(s) at a few points for f = f_infty restricted to the grid, theta = 0.5;
  // the tail beyond the grid uses the same asymptote the operator assumes.
  const double theta = 0.5;
  const auto grid = make_crossing_grid(1e4, 200);
  GridFunction f;
  f.knots = grid;
  f.values.reserve(grid.size());
  for (double s : grid) f.values.push_back(f_infty(s, theta));
  f.tail_exponent = theta - 1.0;
  const auto Tf = apply_T(f, theta);

  const double s_max = grid.back();
  const double A = f_infty_asymptotic_constant(theta);
  for (double s_target : {2.0, 10.0, 400.0}) {
    const std::size_t i =
        std::lower_bound(grid.begin(), grid.end(), s_target) - grid.begin();
    REQUIRE(i < grid.size());
    const double s = grid[i];  // evaluate at the knot nearest the target
    const auto integrand = [&](double t) {
      return std::pow(s + t - 1.0, -theta - 1.0) * f_infty(t, theta);
    };
    // t = 1 + u^2 on [1,2] flattens the (t-1)^theta cusp of f at the left end
    double integral = oracles::adaptive_simpson(
        [&](double u) { return 2.0 * u * integrand(1.0 + u * u); }, 0.0, 1.0, 1e-11);
    integral += oracles::adaptive_simpson(integrand, 2.0, s_max, 1e-11);
    // tail: f ~ A t^{theta-1} up to machine-negligible corrections
    integral += oracles::adaptive_simpson(
        [&](double u) {
          const double t = s_max / u;  // u = s_max / t maps (0,1] to [s_max, inf)
          return std::pow(s + t - 1.0, -theta - 1.0) * A * std::pow(t, theta - 1.0) *
                 t / u;
        },
        1e-8, 1.0, 1e-11);
    const double direct = -std::expm1(theta * std::log1p(-1.0 / s)) +
                          theta * std::pow(s - 1.0, theta) * integral;
    CHECK(Tf.values[i] == doctest::Approx(direct).epsilon(1e-6));
  }
}

TEST_CASE("iteration converges to f_infty") {
  const double theta = 0.5, alpha = 0.25;
  const auto grid = make_crossing_grid(1e3, 100);
  auto [f, diag] =
      iterate_to_fixed_point(theta, alpha, constant_function(grid, 0.5, 0.0), 1e-10, 500);
  CHECK(diag.final_residual < 1e-9);
  CHECK(diag.iterations > 10);
  const PchipEvaluator eval(f);
  double max_err = 0.0;
  for (double s = 1.0; s <= 100.0; s *= 1.07) {
    max_err = std::max(max_err, std::fabs(eval(s) - f_infty(s, theta)));
  }
  CHECK(max_err < 1e-3);
  // measured contraction within the analytic bound
  CHECK(contraction_ratio(diag) <= lipschitz_constant(alpha, theta) * 1.05);
  // increments recorded for every step
  CHECK(static_cast<int>(diag.increments.size()) == diag.iterations);
}

TEST_CASE("iteration validates its window and budget") {
  const auto grid = make_crossing_grid(100.0, 50);
  const auto f0 = constant_function(grid, 0.5, 0.0);
  CHECK_THROWS_AS((void)iterate_to_fixed_point(0.5, 0.9, f0, 1e-10, 200),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)iterate_to_fixed_point(0.5, -0.1, f0, 1e-10, 200),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)iterate_to_fixed_point(0.5, 0.25, f0, 1e-13, 3),
                  ConvergenceError);
}

TEST_CASE("supercritical intensities collapse to one") {
  const auto grid = make_crossing_grid(1e3, 100);
  auto [f, diag] =
      iterate_to_fixed_point(1.2, -0.1, constant_function(grid, 0.5, 0.0), 1e-5, 2000);
  (void)diag;
  double sup = 0.0;
  for (double v : f.values) sup = std::max(sup, std::fabs(v - 1.0));
  CHECK(sup < 1e-3);
}

TEST_CASE("weighted norm semantics") {
  GridFunction f;
  f.knots = {1.0, 10.0, 100.0};
  f.values = {0.5, 0.2, 0.1};
  f.tail_exponent = -0.5;
  // alpha + beta < 0: the tail contributes nothing beyond the end knot
  CHECK(weighted_norm(f, 0.25) ==
        doctest::Approx(std::max({0.5, 0.2 * std::pow(10.0, 0.25),
                                  0.1 * std::pow(100.0, 0.25)}))
            .epsilon(1e-13));
  // alpha + beta > 0 with nonzero end value: unbounded
  CHECK(std::isinf(weighted_norm(f, 0.75)));
  GridFunction g = f;
  g.values = {0.5, 0.2, 0.0};
  CHECK(std::isfinite(weighted_norm(g, 0.75)));
}

TEST_CASE("supermultiplicativity on the grid function") {
  const double theta = 0.5;
  const auto grid = make_crossing_grid(1e4, 200);
  GridFunction f;
  f.knots = grid;
  for (double s : grid) f.values.push_back(f_infty(s, theta));
  f.tail_exponent = theta - 1.0;
  std::vector<double> ss = {1.5, 2.0, 5.0, 10.0, 40.0};
  const auto rows = check_supermultiplicative(f, ss, ss);
  CHECK(rows.size() == ss.size() * ss.size());
  for (const auto& row : rows) {
    CHECK(row.defect >= -1e-6);  // interpolation error only
  }
}

TEST_CASE("tail divergence scan and log fit") {
  const double theta = 0.5;
  const auto scan = tail_divergence_scan(theta, {1e2, 1e3, 1e4});
  CHECK(scan.size() == 3);
  CHECK(scan[0].second < scan[1].second);
  CHECK(scan[1].second < scan[2].second);
  // reference window value computed with mpmath
  CHECK(scan[2].second - scan[0].second ==
        doctest::Approx(2.93279521474967155).epsilon(1e-10));
  const auto fit = fit_against_log(scan, 1e2);
  CHECK(fit.slope == doctest::Approx(f_infty_asymptotic_constant(theta)).epsilon(5e-3));
  CHECK_THROWS_AS((void)fit_against_log(scan, 1e4), InsufficientDataError);
}

TEST_CASE("bessel residual stays small on the default grid") {
  const auto rep = verify_bessel_fixed_point(0.5, 1e3, 100);
  CHECK(rep.knots.size() == rep.f.size());
  CHECK(rep.f.size() == rep.Tf.size());
  double max_res = 0.0;
  for (std::size_t i = 0; i < rep.f.size(); ++i) {
    max_res = std::max(max_res, std::fabs(rep.Tf[i] - rep.f[i]));
  }
  CHECK(rep.max_residual == doctest::Approx(max_res).epsilon(1e-12));
  CHECK(rep.max_residual < 1e-4);
}
