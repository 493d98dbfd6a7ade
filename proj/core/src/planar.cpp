#include "loopsoup/planar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>

#include "loopsoup/errors.hpp"

namespace loopsoup {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double dist2(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

double dist(const Point2& a, const Point2& b) { return std::sqrt(dist2(a, b)); }

double norm2(const Point2& a) { return a.x * a.x + a.y * a.y; }

// Squared distance between segments [p1,p2] and [q1,q2].
double seg_seg_dist2(const Point2& p1, const Point2& p2, const Point2& q1,
                     const Point2& q2) {
  const double d1x = p2.x - p1.x, d1y = p2.y - p1.y;
  const double d2x = q2.x - q1.x, d2y = q2.y - q1.y;
  const double rx = p1.x - q1.x, ry = p1.y - q1.y;
  const double a = d1x * d1x + d1y * d1y;
  const double e = d2x * d2x + d2y * d2y;
  const double f = d2x * rx + d2y * ry;
  double s, t;
  if (a <= 1e-30 && e <= 1e-30) {
    s = t = 0.0;
  } else if (a <= 1e-30) {
    s = 0.0;
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1x * rx + d1y * ry;
    if (e <= 1e-30) {
      t = 0.0;
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1x * d2x + d1y * d2y;
      const double denom = a * e - b * b;
      s = denom > 1e-30 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  const double cx = p1.x + s * d1x - (q1.x + t * d2x);
  const double cy = p1.y + s * d1y - (q1.y + t * d2y);
  return cx * cx + cy * cy;
}

}  // namespace

double disc_poisson_kernel(const Point2& x, const Point2& z) {
  const double xx = norm2(x);
  require(xx < 1.0, "disc_poisson_kernel: x must lie inside the unit disc");
  require(std::fabs(std::sqrt(norm2(z)) - 1.0) <= 1e-9,
          "disc_poisson_kernel: z must lie on the unit circle");
  return (1.0 - xx) / (kTwoPi * dist2(x, z));
}

double bm_annulus_hit_inner(double z_abs, double r, double R) {
  require(r > 0.0 && r < z_abs && z_abs < R,
          "bm_annulus_hit_inner: need 0 < r < |z| < R");
  return std::log(R / z_abs) / std::log(R / r);
}

AnnulusKernelValue annulus_inner_kernel_series(double q, double angle, int n_terms) {
  require(q > 0.0 && q < 1.0, "annulus_inner_kernel_series: q in (0,1)");
  require(n_terms >= 0, "annulus_inner_kernel_series: n_terms >= 0");
  const double lq = std::log(q);
  // series is 2 pi periodic; center the argument
  const double ang = angle - kTwoPi * std::round(angle / kTwoPi);
  const double c = kPi / (2.0 * lq);  // < 0

  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  const auto add_term = [&](long n) {
    const double xn = (ang + kTwoPi * static_cast<double>(n)) * c;
    if (std::fabs(xn) > 350.0) return 0.0;
    const double ch = std::cosh(xn);
    const double sech2 = 1.0 / (ch * ch);
    const double th = std::tanh(xn);
    s0 += sech2;
    s1 += th * sech2;
    s2 += (1.0 - 3.0 * th * th) * sech2;
    return sech2;
  };

  // remainder over |m| > n: |x_m| >= pi^2 (2|m| - 1) / (2 |log q|)
  const auto tail_bound = [&](long n) {
    const double mu = kPi * kPi / std::fabs(lq);
    const double lead = 4.0 * std::exp(-mu * (2.0 * static_cast<double>(n) + 1.0));
    return 3.0 * 2.0 * lead / (-std::expm1(-2.0 * mu));
  };

  add_term(0);
  long n = 0;
  if (n_terms > 0) {
    for (n = 1; n <= n_terms; ++n) {
      add_term(n);
      add_term(-n);
    }
    n = n_terms;
    if (!(tail_bound(n) <= 1e-14 * s0)) {
      throw ConvergenceError(
          "annulus_inner_kernel_series: n_terms too small for a certified tail");
    }
  } else {
    for (n = 1; n <= 4096; ++n) {
      add_term(n);
      add_term(-n);
      if (tail_bound(n) <= 1e-14 * s0) break;
    }
    if (n > 4096) {
      throw ConvergenceError("annulus_inner_kernel_series: tail bound not reached");
    }
  }

  const double lq2 = lq * lq;
  AnnulusKernelValue out;
  out.value = kPi / (q * lq2) * s0;
  out.d_angle = -kPi * kPi / (q * lq2 * lq) * s1;
  out.d2_angle = -kPi * kPi * kPi / (2.0 * q * lq2 * lq2) * s2;
  return out;
}

double annulus_crossing_measure(double r1, double r2) {
  require(r1 > 0.0 && r1 < r2 && r2 <= 1.0,
          "annulus_crossing_measure: need 0 < r1 < r2 <= 1");
  return std::log(-std::log(r1)) - std::log(std::log(r2 / r1));
}

double annulus_crossing_measure_dr1(double r1, double r2) {
  require(r1 > 0.0 && r1 < r2 && r2 <= 1.0,
          "annulus_crossing_measure: need 0 < r1 < r2 <= 1");
  return (1.0 / std::log(r2 / r1) + 1.0 / std::log(r1)) / r1;
}

double single_loop_crossing_prob(double theta, double r1, double r2) {
  require(theta > 0.0, "single_loop_crossing_prob: theta > 0");
  return -std::expm1(-theta * annulus_crossing_measure(r1, r2));
}

namespace {

void check_two_annuli_regime(double d, double rx, double ry, double A, const char* fn) {
  if (!(A >= 1.5)) throw std::invalid_argument(std::string(fn) + ": regime_A >= 1.5");
  if (!(d > 0.0 && d < 1.0)) {
    throw RegimeError(std::string(fn) + ": need 0 < |x - y| < 1");
  }
  const double cap = A * std::log(1.0 / d);
  if (!(rx > 0.0 && ry > 0.0 && std::log(1.0 / rx) >= cap &&
        std::log(1.0 / ry) >= cap)) {
    throw RegimeError(std::string(fn) + ": disc radii must satisfy r <= |x - y|^A");
  }
}

}  // namespace

double two_annuli_measure(const Point2& x, const Point2& y, double rx, double ry,
                          double regime_A) {
  const double d = dist(x, y);
  check_two_annuli_regime(d, rx, ry, regime_A, "two_annuli_measure");
  const double ld = std::log(d);
  return ld * ld / (std::log(1.0 / rx) * std::log(1.0 / ry));
}

double two_annuli_measure_with_outer(const Point2& x, const Point2& y, double rx,
                                     double ry, double R, double regime_A) {
  const double d = dist(x, y);
  check_two_annuli_regime(d, rx, ry, regime_A, "two_annuli_measure_with_outer");
  if (!(regime_A * d <= R && R <= 1.0)) {
    throw RegimeError("two_annuli_measure_with_outer: need A |x - y| <= R <= 1");
  }
  return std::log(1.0 / R) * std::log(R / (d * d)) /
         (std::log(1.0 / rx) * std::log(1.0 / ry));
}

ThreeCrossingsBound three_crossings_bound(const Point2& x, const Point2& y, double rx,
                                          double ry, double R, double theta,
                                          double regime_A) {
  require(theta > 0.0, "three_crossings_bound: theta > 0");
  const double d = dist(x, y);
  ThreeCrossingsBound out;
  out.single_loop = theta * two_annuli_measure_with_outer(x, y, rx, ry, R, regime_A);
  const double bare = two_annuli_measure(x, y, rx, ry, regime_A);
  const double mid = 0.5 * d;
  const double bridge = annulus_crossing_measure(1.5 * d, R);
  out.pair_bridge = theta * theta * bare * bridge;
  out.pair_x_deep = theta * theta * annulus_crossing_measure(rx, R) *
                    annulus_crossing_measure(ry, mid);
  out.pair_y_deep = theta * theta * annulus_crossing_measure(ry, R) *
                    annulus_crossing_measure(rx, mid);
  out.triple = theta * theta * theta * annulus_crossing_measure(rx, mid) *
               annulus_crossing_measure(ry, mid) * bridge;
  return out;
}

McEstimate wos_hitting_prob(const Point2& start, const std::vector<Disc>& targets,
                            const WosDomain& domain, long n_walks, RngStream rng,
                            long* n_stuck) {
  require(!targets.empty(), "wos_hitting_prob: need at least one target");
  require(n_walks >= 1, "wos_hitting_prob: need walks");
  const double R = domain.outer_radius;
  require(R > 0.0, "wos_hitting_prob: outer radius must be > 0");
  require(std::sqrt(norm2(start)) < R, "wos_hitting_prob: start outside the domain");
  for (const Disc& t : targets) {
    require(t.radius > 0.0, "wos_hitting_prob: target radius must be > 0");
    require(std::sqrt(norm2(t.center)) + t.radius < R,
            "wos_hitting_prob: target must lie inside the domain");
    require(dist(start, t.center) > t.radius, "wos_hitting_prob: start inside a target");
  }
  if (domain.inner_absorber) {
    const Disc& a = *domain.inner_absorber;
    require(a.radius > 0.0 && std::sqrt(norm2(a.center)) + a.radius < R,
            "wos_hitting_prob: absorber must lie inside the domain");
    require(dist(start, a.center) > a.radius, "wos_hitting_prob: start inside absorber");
  }

  constexpr double kShell = 1e-6;
  constexpr long kMaxSteps = 100000;
  constexpr long kBlock = 4096;
  const double shell_out = kShell * R;

  long hits = 0;
  long stuck = 0;
  long walk = 0;
  for (long block = 0; walk < n_walks; ++block) {
    PhiloxEngine eng = rng.replica(static_cast<std::uint64_t>(block)).engine();
    const long end = std::min(n_walks, (block + 1) * kBlock);
    for (; walk < end; ++walk) {
      Point2 z = start;
      bool resolved = false;
      for (long step = 0; step < kMaxSteps; ++step) {
        const double d_out = R - std::sqrt(norm2(z));
        if (d_out <= shell_out) {
          resolved = true;  // failure
          break;
        }
        double rho = d_out;
        bool success = false;
        if (domain.inner_absorber) {
          const Disc& a = *domain.inner_absorber;
          const double da = dist(z, a.center) - a.radius;
          if (da <= kShell * a.radius) {
            resolved = true;
            break;
          }
          rho = std::min(rho, da);
        }
        for (const Disc& t : targets) {
          const double dt = dist(z, t.center) - t.radius;
          if (dt <= kShell * t.radius) {
            success = true;
            break;
          }
          rho = std::min(rho, dt);
        }
        if (success) {
          ++hits;
          resolved = true;
          break;
        }
        const double phi = kTwoPi * eng.next_double();
        z.x += rho * std::cos(phi);
        z.y += rho * std::sin(phi);
      }
      if (!resolved) ++stuck;
    }
  }
  if (n_stuck) *n_stuck = stuck;

  McEstimate est;
  est.n = n_walks;
  est.estimate = static_cast<double>(hits) / static_cast<double>(n_walks);
  est.std_error =
      std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(n_walks));
  return est;
}

namespace {

void sample_loop_into(double duration, const Point2& anchor, int n_steps,
                      PhiloxEngine& eng, LoopPath& out) {
  const auto m = static_cast<std::size_t>(n_steps);
  out.duration = duration;
  out.n_steps = n_steps;
  out.points.resize(m + 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = std::sqrt(duration / static_cast<double>(n_steps));
  double wx = 0.0, wy = 0.0;
  out.points[0] = {0.0, 0.0};
  for (std::size_t k = 1; k <= m; ++k) {
    wx += scale * normal(eng);
    wy += scale * normal(eng);
    out.points[k] = {wx, wy};
  }
  // pin the closed bridge to the anchor
  const double fx = wx / static_cast<double>(m);
  const double fy = wy / static_cast<double>(m);
  for (std::size_t k = 0; k <= m; ++k) {
    const double kk = static_cast<double>(k);
    out.points[k].x += anchor.x - kk * fx;
    out.points[k].y += anchor.y - kk * fy;
  }
  out.points[m] = out.points[0];
  std::size_t best = 0;
  double best_n2 = norm2(out.points[0]);
  for (std::size_t k = 1; k < m; ++k) {
    const double n2 = norm2(out.points[k]);
    if (n2 > best_n2) {
      best_n2 = n2;
      best = k;
    }
  }
  out.root = out.points[best];
}

double loop_diameter(const LoopPath& loop) {
  double best = 0.0;
  const std::size_t m = loop.points.size() - 1;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      best = std::max(best, dist2(loop.points[i], loop.points[j]));
    }
  }
  return std::sqrt(best);
}

void check_soup_config(double theta, const SoupConfig& cfg) {
  require(theta > 0.0, "loop soup: theta must be > 0");
  require(cfg.t_min > 0.0 && cfg.t_min < cfg.t_max, "loop soup: need 0 < t_min < t_max");
  require(cfg.n_steps >= 16, "loop soup: need n_steps >= 16");
  require(cfg.region_radius > 0.0 && cfg.region_radius <= 1.0,
          "loop soup: region radius in (0,1]");
  require(cfg.diam_min >= 0.0, "loop soup: diam_min >= 0");
}

LoopSoup2D sample_soup_with(double theta, const SoupConfig& cfg, PhiloxEngine& eng) {
  LoopSoup2D soup;
  soup.theta = theta;
  soup.config = cfg;
  const double mass = theta * cfg.region_radius * cfg.region_radius *
                      (1.0 / cfg.t_min - 1.0 / cfg.t_max) / 2.0;
  std::poisson_distribution<long> pois(mass);
  const long n = pois(eng);
  soup.loops.reserve(static_cast<std::size_t>(n));
  LoopPath loop;
  for (long i = 0; i < n; ++i) {
    // duration has density ~ t^{-2} on [t_min, t_max]
    const double u = eng.next_double();
    const double duration =
        1.0 / (1.0 / cfg.t_min - u * (1.0 / cfg.t_min - 1.0 / cfg.t_max));
    const double rad = cfg.region_radius * std::sqrt(eng.next_double());
    const double ang = kTwoPi * eng.next_double();
    const Point2 anchor{rad * std::cos(ang), rad * std::sin(ang)};
    sample_loop_into(duration, anchor, cfg.n_steps, eng, loop);
    bool outside = false;
    for (const Point2& p : loop.points) {
      if (norm2(p) > 1.0) {
        outside = true;
        break;
      }
    }
    if (outside) {
      ++soup.discarded_outside;
      continue;
    }
    if (cfg.diam_min > 0.0 && loop_diameter(loop) < cfg.diam_min) {
      ++soup.discarded_small;
      continue;
    }
    soup.loops.push_back(loop);
  }
  return soup;
}

double default_delta(const SoupConfig& cfg) {
  return cfg.proximity_delta > 0.0
             ? cfg.proximity_delta
             : 2.0 * std::sqrt(cfg.t_max / static_cast<double>(cfg.n_steps));
}

}  // namespace

LoopPath sample_loop(double duration, const Point2& anchor, int n_steps, RngStream rng) {
  require(duration > 0.0, "sample_loop: duration must be > 0");
  require(n_steps >= 16, "sample_loop: need n_steps >= 16");
  PhiloxEngine eng = rng.engine();
  LoopPath out;
  sample_loop_into(duration, anchor, n_steps, eng, out);
  return out;
}

LoopSoup2D sample_loop_soup_2d(double theta, const SoupConfig& cfg, RngStream rng) {
  check_soup_config(theta, cfg);
  PhiloxEngine eng = rng.engine();
  return sample_soup_with(theta, cfg, eng);
}

int ClusterForest::n_clusters() const {
  int n = 0;
  for (std::size_t i = 0; i < parent.size(); ++i) {
    if (parent[i] == static_cast<int>(i)) ++n;
  }
  return n;
}

ClusterForest build_clusters(const std::vector<LoopPath>& loops, double proximity_delta) {
  require(proximity_delta > 0.0, "build_clusters: proximity_delta must be > 0");
  const int n = static_cast<int>(loops.size());
  std::vector<int> parent(loops.size());
  std::vector<int> size(loops.size(), 1);
  for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;

  const auto find = [&](int i) {
    while (parent[static_cast<std::size_t>(i)] != i) {
      parent[static_cast<std::size_t>(i)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
      i = parent[static_cast<std::size_t>(i)];
    }
    return i;
  };
  const auto unite = [&](int i, int j) {
    i = find(i);
    j = find(j);
    if (i == j) return;
    if (size[static_cast<std::size_t>(i)] < size[static_cast<std::size_t>(j)])
      std::swap(i, j);
    parent[static_cast<std::size_t>(j)] = i;
    size[static_cast<std::size_t>(i)] += size[static_cast<std::size_t>(j)];
  };

  // spatial hash of segments on cells of width proximity_delta; a pair of
  // segments within proximity_delta shares a cell once each bbox is inflated
  // by half of it
  const double cell = proximity_delta;
  const double half = 0.5 * proximity_delta;
  struct SegRef {
    int loop;
    int seg;
  };
  std::unordered_map<long long, std::vector<SegRef>> grid;
  grid.reserve(1024);
  const auto cell_key = [](long ix, long iy) {
    return (static_cast<long long>(ix) << 32) ^ (static_cast<long long>(iy) & 0xffffffffLL);
  };
  for (int li = 0; li < n; ++li) {
    const auto& pts = loops[static_cast<std::size_t>(li)].points;
    for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
      const double x0 = std::min(pts[s].x, pts[s + 1].x) - half;
      const double x1 = std::max(pts[s].x, pts[s + 1].x) + half;
      const double y0 = std::min(pts[s].y, pts[s + 1].y) - half;
      const double y1 = std::max(pts[s].y, pts[s + 1].y) + half;
      for (long ix = static_cast<long>(std::floor(x0 / cell));
           ix <= static_cast<long>(std::floor(x1 / cell)); ++ix) {
        for (long iy = static_cast<long>(std::floor(y0 / cell));
             iy <= static_cast<long>(std::floor(y1 / cell)); ++iy) {
          grid[cell_key(ix, iy)].push_back({li, static_cast<int>(s)});
        }
      }
    }
  }

  const double d2max = proximity_delta * proximity_delta;
  for (const auto& [key, refs] : grid) {
    (void)key;
    for (std::size_t a = 0; a < refs.size(); ++a) {
      for (std::size_t b = a + 1; b < refs.size(); ++b) {
        if (refs[a].loop == refs[b].loop) continue;
        if (find(refs[a].loop) == find(refs[b].loop)) continue;
        const auto& pa = loops[static_cast<std::size_t>(refs[a].loop)].points;
        const auto& pb = loops[static_cast<std::size_t>(refs[b].loop)].points;
        const auto sa = static_cast<std::size_t>(refs[a].seg);
        const auto sb = static_cast<std::size_t>(refs[b].seg);
        if (seg_seg_dist2(pa[sa], pa[sa + 1], pb[sb], pb[sb + 1]) <= d2max) {
          unite(refs[a].loop, refs[b].loop);
        }
      }
    }
  }

  ClusterForest forest;
  forest.proximity_delta = proximity_delta;
  forest.parent.resize(loops.size());
  for (int i = 0; i < n; ++i) forest.parent[static_cast<std::size_t>(i)] = find(i);
  return forest;
}

bool crossing_event(const ClusterForest& forest, const std::vector<LoopPath>& loops,
                    double r_in, double r_out) {
  require(r_in > 0.0 && r_in < r_out, "crossing_event: need 0 < r_in < r_out");
  require(forest.parent.size() == loops.size(), "crossing_event: forest/loops mismatch");
  std::unordered_map<int, std::pair<double, double>> span;  // root -> (min, max) modulus
  span.reserve(loops.size());
  for (std::size_t i = 0; i < loops.size(); ++i) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const Point2& p : loops[i].points) {
      const double r = std::sqrt(norm2(p));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    auto [it, fresh] = span.try_emplace(forest.find(static_cast<int>(i)), lo, hi);
    if (!fresh) {
      it->second.first = std::min(it->second.first, lo);
      it->second.second = std::max(it->second.second, hi);
    }
  }
  for (const auto& [root, mm] : span) {
    (void)root;
    if (mm.first <= r_in && mm.second >= r_out) return true;
  }
  return false;
}

std::vector<CrossingScanRow> crossing_probability_scan(
    const std::vector<double>& thetas,
    const std::vector<std::pair<double, double>>& annuli, const SoupConfig& cfg,
    long n_soups, RngStream rng) {
  require(!thetas.empty() && !annuli.empty(), "crossing_probability_scan: empty grids");
  require(n_soups >= 1, "crossing_probability_scan: need soups");
  for (double th : thetas) require(th > 0.0, "crossing_probability_scan: theta > 0");
  for (const auto& [ri, ro] : annuli) {
    require(ri > 0.0 && ri < ro, "crossing_probability_scan: bad annulus");
  }
  const double theta_max = *std::max_element(thetas.begin(), thetas.end());
  check_soup_config(theta_max, cfg);
  const double delta = default_delta(cfg);

  std::vector<long> counts(thetas.size() * annuli.size(), 0);
  std::vector<double> marks;
  std::vector<LoopPath> kept;
  for (long r = 0; r < n_soups; ++r) {
    PhiloxEngine eng = rng.replica(static_cast<std::uint64_t>(r)).engine();
    LoopSoup2D soup = sample_soup_with(theta_max, cfg, eng);
    marks.resize(soup.loops.size());
    for (double& u : marks) u = eng.next_double();
    for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
      const double frac = thetas[ti] / theta_max;
      kept.clear();
      for (std::size_t i = 0; i < soup.loops.size(); ++i) {
        if (marks[i] < frac) kept.push_back(soup.loops[i]);
      }
      const ClusterForest forest = build_clusters(kept, delta);
      for (std::size_t ai = 0; ai < annuli.size(); ++ai) {
        if (crossing_event(forest, kept, annuli[ai].first, annuli[ai].second)) {
          ++counts[ti * annuli.size() + ai];
        }
      }
    }
  }

  std::vector<CrossingScanRow> rows;
  rows.reserve(counts.size());
  for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
    for (std::size_t ai = 0; ai < annuli.size(); ++ai) {
      CrossingScanRow row;
      row.theta = thetas[ti];
      row.r_in = annuli[ai].first;
      row.r_out = annuli[ai].second;
      row.est.n = n_soups;
      row.est.estimate = static_cast<double>(counts[ti * annuli.size() + ai]) /
                         static_cast<double>(n_soups);
      row.est.std_error = std::sqrt(row.est.estimate * (1.0 - row.est.estimate) /
                                    static_cast<double>(n_soups));
      rows.push_back(row);
    }
  }
  return rows;
}

SurroundScan surround_probability_scan(double theta, const std::vector<double>& radii,
                                       const SoupConfig& cfg, long n_soups,
                                       RngStream rng) {
  require(!radii.empty(), "surround_probability_scan: empty radius grid");
  for (double r : radii) {
    require(r > 0.0 && r < 1.0, "surround_probability_scan: radii in (0,1)");
  }
  require(n_soups >= 1, "surround_probability_scan: need soups");
  check_soup_config(theta, cfg);
  constexpr double kWindingMin = kTwoPi - 0.01;

  std::vector<long> counts(radii.size(), 0);
  std::vector<std::pair<double, double>> loop_stats;  // (|winding|, min modulus)
  for (long rep = 0; rep < n_soups; ++rep) {
    PhiloxEngine eng = rng.replica(static_cast<std::uint64_t>(rep)).engine();
    const LoopSoup2D soup = sample_soup_with(theta, cfg, eng);
    loop_stats.clear();
    for (const LoopPath& loop : soup.loops) {
      double winding = 0.0;
      double min_mod2 = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k + 1 < loop.points.size(); ++k) {
        const Point2& p = loop.points[k];
        const Point2& q = loop.points[k + 1];
        winding += std::atan2(p.x * q.y - p.y * q.x, p.x * q.x + p.y * q.y);
        min_mod2 = std::min(min_mod2, norm2(p));
      }
      if (std::fabs(winding) >= kWindingMin) {
        loop_stats.emplace_back(std::fabs(winding), std::sqrt(min_mod2));
      }
    }
    for (std::size_t i = 0; i < radii.size(); ++i) {
      for (const auto& [w, mm] : loop_stats) {
        (void)w;
        if (mm > radii[i]) {
          ++counts[i];
          break;
        }
      }
    }
  }

  SurroundScan scan;
  scan.rows.reserve(radii.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long nfit = 0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    SurroundRow row;
    row.r = radii[i];
    row.est.n = n_soups;
    row.est.estimate = static_cast<double>(counts[i]) / static_cast<double>(n_soups);
    row.est.std_error = std::sqrt(row.est.estimate * (1.0 - row.est.estimate) /
                                  static_cast<double>(n_soups));
    scan.rows.push_back(row);
    if (row.est.estimate < 1.0) {
      const double x = std::log(radii[i]);
      const double y = std::log1p(-row.est.estimate);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++nfit;
    }
  }
  if (nfit >= 2) {
    const double denom = static_cast<double>(nfit) * sxx - sx * sx;
    if (std::fabs(denom) > 0.0) {
      scan.slope = (static_cast<double>(nfit) * sxy - sx * sy) / denom;
      scan.intercept = (sy - scan.slope * sx) / static_cast<double>(nfit);
    }
  }
  return scan;
}

FkgReport fkg_spot_check(double theta, std::pair<double, double> annulus_first,
                         std::pair<double, double> annulus_second,
                         const SoupConfig& cfg, long n_soups, RngStream rng) {
  require(n_soups >= 2, "fkg_spot_check: need soups");
  check_soup_config(theta, cfg);
  const double delta = default_delta(cfg);

  std::vector<unsigned char> xs(static_cast<std::size_t>(n_soups));
  std::vector<unsigned char> ys(static_cast<std::size_t>(n_soups));
  for (long r = 0; r < n_soups; ++r) {
    PhiloxEngine eng = rng.replica(static_cast<std::uint64_t>(r)).engine();
    const LoopSoup2D soup = sample_soup_with(theta, cfg, eng);
    const ClusterForest forest = build_clusters(soup.loops, delta);
    xs[static_cast<std::size_t>(r)] = crossing_event(forest, soup.loops,
                                                     annulus_first.first,
                                                     annulus_first.second);
    ys[static_cast<std::size_t>(r)] = crossing_event(forest, soup.loops,
                                                     annulus_second.first,
                                                     annulus_second.second);
  }

  FkgReport rep;
  rep.n = n_soups;
  double s1 = 0, s2 = 0, s12 = 0;
  for (long r = 0; r < n_soups; ++r) {
    s1 += xs[static_cast<std::size_t>(r)];
    s2 += ys[static_cast<std::size_t>(r)];
    s12 += xs[static_cast<std::size_t>(r)] * ys[static_cast<std::size_t>(r)];
  }
  const double dn = static_cast<double>(n_soups);
  rep.p_first = s1 / dn;
  rep.p_second = s2 / dn;
  rep.p_both = s12 / dn;
  rep.covariance = rep.p_both - rep.p_first * rep.p_second;
  double m2 = 0.0;
  for (long r = 0; r < n_soups; ++r) {
    const double inf = (xs[static_cast<std::size_t>(r)] - rep.p_first) *
                           (ys[static_cast<std::size_t>(r)] - rep.p_second) -
                       rep.covariance;
    m2 += inf * inf;
  }
  rep.covariance_std_error = std::sqrt(m2 / (dn * (dn - 1.0)));
  return rep;
}

}  // namespace loopsoup
