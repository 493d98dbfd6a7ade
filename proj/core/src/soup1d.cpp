#include "loopsoup/soup1d.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "loopsoup/errors.hpp"

namespace loopsoup {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

struct SoupParams {
  double theta, u, v, eps;
  double mass;   // expected interval count
  double total;  // mass / theta, the unnormalized length-CDF at infinity
  double g_u;    // unnormalized length-CDF at ell = u (0 when eps >= u)
};

SoupParams make_params(double theta, double u, double v, double eps) {
  require(theta > 0.0, "interval soup: theta must be > 0");
  require(u >= 0.0 && v > u, "interval soup: need 0 <= u < v");
  require(eps > 0.0, "interval soup: cutoff must be > 0");
  SoupParams p{theta, u, v, eps, 0.0, 0.0, 0.0};
  if (eps >= u) {
    p.g_u = 0.0;
    p.total = v / eps;
  } else {
    p.g_u = (v - u) * (1.0 / eps - 1.0 / u) + std::log(u / eps);
    p.total = p.g_u + v / u;
  }
  p.mass = theta * p.total;
  return p;
}

// Inverse of the unnormalized length CDF
//   G(l) = (v-u)(1/eps - 1/l) + log(l/eps)          eps <= l <= u
//   G(l) = G(u) + v (1/u - 1/l)                     l >= u
// (first branch absent when eps >= u).  Solved in x = 1/l; the short-length
// branch needs a few safeguarded Newton steps, the rest is closed form.
double invert_length(const SoupParams& p, double y) {
  if (p.eps >= p.u) return 1.0 / (1.0 / p.eps - y / p.v);
  if (y >= p.g_u) return 1.0 / (1.0 / p.u - (y - p.g_u) / p.v);
  const double span = p.v - p.u;
  double x_lo = 1.0 / p.u;   // F(x_lo) > 0
  double x_hi = 1.0 / p.eps; // F(x_hi) < 0
  const auto F = [&](double x) {
    return span * (1.0 / p.eps - x) - std::log(x * p.eps) - y;
  };
  double x = 1.0 / p.eps - y / std::max(span, 1e-300);
  if (!(x > x_lo && x < x_hi)) x = 0.5 * (x_lo + x_hi);
  for (int it = 0; it < 60; ++it) {
    const double f = F(x);
    if (std::fabs(f) <= 1e-11 * (1.0 + std::fabs(y))) break;
    (f > 0.0 ? x_lo : x_hi) = x;
    const double step = f / (span + 1.0 / x);  // -F/F'
    x += step;
    if (!(x > x_lo && x < x_hi)) x = 0.5 * (x_lo + x_hi);
  }
  return 1.0 / x;
}

void sample_into(const SoupParams& p, PhiloxEngine& eng, std::vector<Interval>& out) {
  std::poisson_distribution<long> pois(p.mass);
  const long n = pois(eng);
  out.clear();
  out.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const double ell = invert_length(p, eng.next_double() * p.total);
    const double a_min = std::max(0.0, p.u - ell);
    const double a = a_min + (p.v - a_min) * eng.next_double();
    out.push_back({a, a + ell});
  }
}

// Bucket sort by left end; within-bucket order restored by one insertion pass
// (left ends are near uniform over the window, so displacements stay local).
void sort_by_left(std::vector<Interval>& v, std::vector<int>& count,
                  std::vector<Interval>& scratch) {
  const std::size_t n = v.size();
  if (n < 32) {
    std::sort(v.begin(), v.end(), [](const Interval& x, const Interval& y) {
      return x.a < y.a;
    });
    return;
  }
  double lo = v[0].a, hi = v[0].a;
  for (const auto& iv : v) {
    lo = std::min(lo, iv.a);
    hi = std::max(hi, iv.a);
  }
  if (!(hi > lo)) return;
  const double scale = static_cast<double>(n) / (hi - lo);
  count.assign(n + 1, 0);
  const auto bucket = [&](double a) {
    auto k = static_cast<std::size_t>((a - lo) * scale);
    return std::min(k, n - 1);
  };
  for (const auto& iv : v) ++count[bucket(iv.a) + 1];
  for (std::size_t k = 1; k <= n; ++k) count[k] += count[k - 1];
  scratch.resize(n);
  for (const auto& iv : v) scratch[static_cast<std::size_t>(count[bucket(iv.a)]++)] = iv;
  v.swap(scratch);
  for (std::size_t i = 1; i < n; ++i) {
    const Interval key = v[i];
    std::size_t j = i;
    while (j > 0 && v[j - 1].a > key.a) {
      v[j] = v[j - 1];
      --j;
    }
    v[j] = key;
  }
}

bool covered_sorted(const std::vector<Interval>& v, double p, double q) {
  double reach = p;
  for (const auto& iv : v) {
    if (iv.b <= reach) continue;
    if (iv.a > reach) return false;
    reach = iv.b;
    if (reach >= q) return true;
  }
  return reach >= q;
}

// sup of the uncovered subset of [p,q]; p if fully covered.
double last_gap_sorted(const std::vector<Interval>& v, double p, double q) {
  double g = p;
  double reach = p;
  for (const auto& iv : v) {
    if (iv.a > reach) {
      if (reach < q) g = std::min(iv.a, q);
      reach = iv.b;
    } else {
      reach = std::max(reach, iv.b);
    }
    if (reach >= q) return g;
  }
  return q;  // a gap runs to the window edge
}

}  // namespace

double soup_mass(double theta, double u, double v, double epsilon) {
  return make_params(theta, u, v, epsilon).mass;
}

IntervalSoupSample sample_interval_soup(double theta, double u, double v, double epsilon,
                                        RngStream rng) {
  const SoupParams p = make_params(theta, u, v, epsilon);
  IntervalSoupSample s;
  s.window_lo = u;
  s.window_hi = v;
  s.cutoff = epsilon;
  PhiloxEngine eng = rng.engine();
  sample_into(p, eng, s.intervals);
  return s;
}

bool covers_window(const IntervalSoupSample& sample, double p, double q) {
  require(p <= q, "covers_window: p <= q required");
  require(sample.window_lo <= p && q <= sample.window_hi,
          "covers_window: [p,q] must lie inside the sampled window");
  std::vector<Interval> v = sample.intervals;
  std::vector<int> count;
  std::vector<Interval> scratch;
  sort_by_left(v, count, scratch);
  return covered_sorted(v, p, q);
}

McEstimate covering_probability(double theta, double s, double epsilon, long n_replicas,
                                RngStream rng) {
  require(s > 1.0, "covering_probability: s > 1 required");
  require(n_replicas >= 1, "covering_probability: need replicas");
  const SoupParams p = make_params(theta, 1.0, s, epsilon);
  std::vector<Interval> buf;
  std::vector<int> count;
  std::vector<Interval> scratch;
  long hits = 0;
  for (long r = 0; r < n_replicas; ++r) {
    PhiloxEngine eng = rng.replica(static_cast<std::uint64_t>(r)).engine();
    sample_into(p, eng, buf);
    sort_by_left(buf, count, scratch);
    if (covered_sorted(buf, 1.0, s)) ++hits;
  }
  McEstimate est;
  est.n = n_replicas;
  est.estimate = static_cast<double>(hits) / static_cast<double>(n_replicas);
  est.std_error =
      std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(n_replicas));
  return est;
}

LastUncoveredSample last_uncovered_statistic(double theta, double s, double epsilon,
                                             long n_replicas, RngStream rng,
                                             double delta0) {
  if (delta0 <= 0.0) delta0 = 10.0 * epsilon;
  require(delta0 < s, "last_uncovered_statistic: delta0 must be below s");
  require(n_replicas >= 1, "last_uncovered_statistic: need replicas");
  const SoupParams p = make_params(theta, delta0, s, epsilon);
  LastUncoveredSample out;
  out.delta0 = delta0;
  out.ratios.reserve(static_cast<std::size_t>(n_replicas));
  std::vector<Interval> buf;
  std::vector<int> count;
  std::vector<Interval> scratch;
  for (long r = 0; r < n_replicas; ++r) {
    PhiloxEngine eng = rng.replica(static_cast<std::uint64_t>(r)).engine();
    sample_into(p, eng, buf);
    sort_by_left(buf, count, scratch);
    const double g = last_gap_sorted(buf, delta0, s);
    if (g <= delta0) ++out.clamped;
    out.ratios.push_back(g / s);
  }
  return out;
}

BesqPath besq_sample_path(double theta, double x0, const std::vector<double>& time_grid,
                          RngStream rng) {
  require(theta > 0.0, "besq_sample_path: theta must be > 0");
  require(x0 >= 0.0, "besq_sample_path: start must be >= 0");
  require(!time_grid.empty(), "besq_sample_path: empty time grid");
  BesqPath path;
  path.dimension = 2.0 * theta;
  require(time_grid.front() >= 0.0, "besq_sample_path: negative time");
  for (std::size_t i = 0; i + 1 < time_grid.size(); ++i) {
    require(time_grid[i] < time_grid[i + 1], "besq_sample_path: times must increase");
  }
  path.times.reserve(time_grid.size() + 1);
  if (time_grid.front() != 0.0) path.times.push_back(0.0);
  path.times.insert(path.times.end(), time_grid.begin(), time_grid.end());
  PhiloxEngine eng = rng.engine();
  path.values.reserve(path.times.size());
  path.values.push_back(x0);
  for (std::size_t i = 1; i < path.times.size(); ++i) {
    const double h = path.times[i] - path.times[i - 1];
    const double x = path.values.back();
    long jumps = 0;
    if (x > 0.0) {
      std::poisson_distribution<long> pois(x / (2.0 * h));
      jumps = pois(eng);
    }
    std::gamma_distribution<double> gamma(theta + static_cast<double>(jumps), 2.0 * h);
    path.values.push_back(gamma(eng));
  }
  return path;
}

std::vector<double> excursion_death_time_samples(double theta, long n_samples,
                                                 RngStream rng) {
  require(theta > 0.0, "excursion_death_time_samples: theta must be > 0");
  require(n_samples >= 1, "excursion_death_time_samples: need samples");
  PhiloxEngine eng = rng.engine();
  std::gamma_distribution<double> gamma(theta, 2.0);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  for (long i = 0; i < n_samples; ++i) {
    const double g = gamma(eng);
    const double e = -std::log(eng.next_double_pos());
    out.push_back(g / (2.0 * e));
  }
  return out;
}

std::vector<HittingTailRow> bm_hitting_time_tail(double level,
                                                 const std::vector<double>& t_grid,
                                                 long n_paths, double dt, RngStream rng) {
  require(level > 0.0, "bm_hitting_time_tail: level must be > 0");
  require(dt > 0.0, "bm_hitting_time_tail: dt must be > 0");
  require(n_paths >= 2, "bm_hitting_time_tail: need paths");
  require(!t_grid.empty(), "bm_hitting_time_tail: empty t grid");
  for (std::size_t i = 0; i + 1 < t_grid.size(); ++i) {
    require(t_grid[i] > 0.0 && t_grid[i] < t_grid[i + 1],
            "bm_hitting_time_tail: t grid must be positive increasing");
  }
  const double horizon = t_grid.back();
  const auto n_steps = static_cast<long>(std::ceil(horizon / dt));

  std::vector<double> death(static_cast<std::size_t>(n_paths), 0.0);
  const double sqrt_dt = std::sqrt(dt);
  constexpr long kBlock = 4096;  // one stream per block of paths
  long path_index = 0;
  for (long block = 0; path_index < n_paths; ++block) {
    PhiloxEngine eng = rng.replica(static_cast<std::uint64_t>(block)).engine();
    std::normal_distribution<double> normal(0.0, 1.0);
    const long end = std::min(n_paths, (block + 1) * kBlock);
    for (; path_index < end; ++path_index) {
      double x = 0.0;
      double tau = horizon + dt;  // sentinel: survived the horizon
      for (long k = 1; k <= n_steps; ++k) {
        const double x_next = x + sqrt_dt * normal(eng);
        if (x_next <= -level) {
          tau = static_cast<double>(k) * dt;
          break;
        }
        // Brownian bridge: crossing inside the step despite both ends above
        const double p_cross =
            std::exp(-2.0 * (x + level) * (x_next + level) / dt);
        if (eng.next_double() < p_cross) {
          tau = static_cast<double>(k) * dt;
          break;
        }
        x = x_next;
      }
      death[static_cast<std::size_t>(path_index)] = tau;
    }
  }
  std::sort(death.begin(), death.end());

  std::vector<HittingTailRow> rows;
  rows.reserve(t_grid.size());
  for (double t : t_grid) {
    HittingTailRow row;
    row.t = t;
    row.exact = std::erf(level / std::sqrt(2.0 * t));
    const auto it = std::upper_bound(death.begin(), death.end(), t);
    const double surv = static_cast<double>(death.end() - it);
    row.estimate = surv / static_cast<double>(n_paths);
    row.std_error = std::sqrt(row.estimate * (1.0 - row.estimate) /
                              static_cast<double>(n_paths));
    row.asymptotic = level * std::sqrt(2.0 / (3.141592653589793 * t));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace loopsoup
