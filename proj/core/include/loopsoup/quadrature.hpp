#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <utility>

#include "loopsoup/errors.hpp"

namespace loopsoup {

// 3-point Gauss-Legendre rule on [-1,1].
inline constexpr std::array<double, 3> kGauss3Nodes = {
    -0.7745966692414834, 0.0, 0.7745966692414834};
inline constexpr std::array<double, 3> kGauss3Weights = {
    0.5555555555555556, 0.8888888888888888, 0.5555555555555556};

// Tanh-sinh quadrature of f over the finite interval [a,b].
//
// Robust to integrable endpoint singularities: abscissas are generated via
// q = exp(-pi sinh t) so the distance to the endpoint, r*2q/(1+q), never
// rounds to zero while the double-exponential weight is still relevant.
template <class F>
double tanh_sinh(F&& f, double a, double b,
                 double rel_tol = 1e-13, double abs_tol = 0.0, int max_level = 12) {
  const double r = 0.5 * (b - a);
  if (r <= 0.0) return 0.0;
  constexpr double kHalfPi = 1.5707963267948966;

  const auto pair_sum = [&](double t) {
    const double sh = std::sinh(t);
    const double q = std::exp(-2.0 * kHalfPi * sh);
    const double d = 2.0 * q / (1.0 + q);                // 1 - tanh((pi/2) sinh t)
    const double w = std::cosh(t) * kHalfPi * 4.0 * q / ((1.0 + q) * (1.0 + q));
    if (!(w > 1e-280)) return std::pair<double, bool>{0.0, false};
    return std::pair<double, bool>{w * (f(a + r * d) + f(b - r * d)), true};
  };

  double h = 1.0;
  double sum = f(0.5 * (a + b)) * kHalfPi;
  for (std::size_t k = 1;; ++k) {
    auto [v, live] = pair_sum(static_cast<double>(k) * h);
    if (!live) break;
    sum += v;
  }
  double integral = sum * h * r;

  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    double add = 0.0;
    // odd multiples of h only; even ones were accumulated at coarser levels
    for (std::size_t k = 1;; k += 2) {
      auto [v, live] = pair_sum(static_cast<double>(k) * h);
      if (!live) break;
      add += v;
    }
    const double prev = integral;
    integral = 0.5 * prev + add * h * r;
    const double change = std::fabs(integral - prev);
    if (level >= 3 && change <= rel_tol * std::fabs(integral) + abs_tol) {
      return integral;
    }
  }
  throw ConvergenceError("tanh_sinh: no convergence within level budget");
}

}  // namespace loopsoup
