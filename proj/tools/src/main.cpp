// loopsoup: command line front end for the crossing-probability laboratory.
// One subcommand per experiment; CSV rows are the primary output, with a JSON
// envelope (parameters, seed, runtime, warnings) written alongside when an
// output path is given.  Identical configs and seeds produce byte-identical
// CSV bodies.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "loopsoup/capacity.hpp"
#include "loopsoup/errors.hpp"
#include "loopsoup/fixed_point.hpp"
#include "loopsoup/planar.hpp"
#include "loopsoup/rng.hpp"
#include "loopsoup/soup1d.hpp"
#include "loopsoup/special.hpp"

namespace {

using json = nlohmann::json;
using namespace loopsoup;

constexpr const char* kVersion = "loopsoup 0.1.0";

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(long v) { return std::to_string(v); }

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

double parse_double(const std::string& token) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + token + "'");
  }
  if (pos != token.size()) throw std::invalid_argument("not a number: '" + token + "'");
  return v;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (const std::string& tok : split(text, ',')) out.push_back(parse_double(tok));
  if (out.empty()) throw std::invalid_argument("empty numeric list");
  return out;
}

Point2 parse_point(const std::string& text) {
  const auto v = parse_list(text);
  if (v.size() != 2) throw std::invalid_argument("expected 'x,y': '" + text + "'");
  return {v[0], v[1]};
}

Disc parse_disc(const std::string& text) {
  const auto v = parse_list(text);
  if (v.size() != 3) throw std::invalid_argument("expected 'x,y,r': '" + text + "'");
  return {{v[0], v[1]}, v[2]};
}

std::vector<std::pair<double, double>> parse_annuli(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  for (const std::string& tok : split(text, ',')) {
    const auto rr = split(tok, ':');
    if (rr.size() != 2) {
      throw std::invalid_argument("expected 'r_in:r_out' pairs: '" + text + "'");
    }
    out.emplace_back(parse_double(rr[0]), parse_double(rr[1]));
  }
  if (out.empty()) throw std::invalid_argument("empty annulus list");
  return out;
}

// Kolmogorov-Smirnov distance of samples against a CDF.
template <class Cdf>
double ks_distance(std::vector<double> samples, Cdf&& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = cdf(samples[i]);
    ks = std::max(ks, std::max(F - static_cast<double>(i) / n,
                               static_cast<double>(i + 1) / n - F));
  }
  return ks;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct RunResult {
  Table table;
  std::optional<Table> trace;
  json params = json::object();
  json results = json::object();
  std::vector<std::string> warnings;
};

struct Config {
  double theta = 0.5;
  double alpha = 0.25;
  double s = 2.0;
  double s_max = 1e4;
  int knots_per_decade = 200;
  double tol = 1e-12;
  long max_iter = 2000;
  double start_value = 0.5;
  double epsilon = 1e-4;
  long n = 100000;
  double delta0 = 0.0;
  double x0 = 1.0;
  double t_horizon = 1.0;
  double q = 1e-4;
  int angle_count = 64;
  int n_terms = 0;
  std::string mode = "annulus";
  double r1 = 0.1;
  double r2 = 0.5;
  double d = 0.049787068367863944;
  double rx = 1e-13;
  double ry = 1e-13;
  double R = 0.0;
  double regime_A = 10.0;
  std::string start_str = "0.3,0";
  double outer_radius = 1.0;
  std::vector<std::string> targets_str;
  std::string absorber_str;
  std::string theta_list = "0.5";
  std::string annuli_str = "0.3:0.6";
  double t_min = 1e-2;
  double t_max = 1.0;
  int steps = 64;
  double diam_min = 0.0;
  double region_radius = 1.0;
  double delta = 0.0;
  std::string radii = "0.2,0.3,0.4,0.5";
  std::string alpha_list = "0.5,1";
  std::string cloud = "segment";
  std::string h_list = "0.015625,0.0078125,0.00390625";
  double cantor_ratio = 0.33333333333333331;
  std::string levels = "4,6";
  double gap_tol = 1e-10;
  long fw_max_iter = 200000;
  std::string tau_theta_list = "0.6,0.7,0.8,0.9";
  std::string s_ends = "100,1000,10000";
  double fit_from = 0.0;
  std::string s_grid = "1,2,4";

  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  int threads = 1;
  std::string out;
  std::string format = "csv";
  std::string sweep;

  RngStream rng() const { return {seed, stream}; }
};

const std::map<std::string, double Config::*> kSweepable = {
    {"theta", &Config::theta},     {"alpha", &Config::alpha},
    {"s", &Config::s},             {"epsilon", &Config::epsilon},
    {"q", &Config::q},             {"x0", &Config::x0},
    {"t", &Config::t_horizon},     {"r1", &Config::r1},
    {"r2", &Config::r2},           {"d", &Config::d},
};

SoupConfig soup_config(const Config& c) {
  SoupConfig cfg;
  cfg.t_min = c.t_min;
  cfg.t_max = c.t_max;
  cfg.n_steps = c.steps;
  cfg.diam_min = c.diam_min;
  cfg.region_radius = c.region_radius;
  cfg.proximity_delta = c.delta;
  return cfg;
}

RunResult run_finfty_table(const Config& c) {
  RunResult r;
  r.params = {{"theta", c.theta}, {"s", c.s_grid}};
  r.table.columns = {"s", "value", "method_tolerance"};
  for (double s : parse_list(c.s_grid)) {
    r.table.rows.push_back({fmt(s), fmt(f_infty(s, c.theta)), fmt(1e-13)});
  }
  return r;
}

RunResult run_fixed_point(const Config& c) {
  RunResult r;
  r.params = {{"theta", c.theta},         {"alpha", c.alpha},
              {"s_max", c.s_max},         {"knots_per_decade", c.knots_per_decade},
              {"tol", c.tol},             {"max_iter", c.max_iter},
              {"start", c.start_value}};
  const auto grid = make_crossing_grid(c.s_max, c.knots_per_decade);
  const auto f0 = constant_function(grid, c.start_value, 0.0);
  auto [f, diag] = iterate_to_fixed_point(c.theta, c.alpha, f0, c.tol,
                                          static_cast<int>(c.max_iter));

  r.table.columns = {"s", "value"};
  double sup_to_one = 0.0;
  for (std::size_t i = 0; i < f.knots.size(); ++i) {
    r.table.rows.push_back({fmt(f.knots[i]), fmt(f.values[i])});
    sup_to_one = std::max(sup_to_one, std::fabs(f.values[i] - 1.0));
  }
  Table trace;
  trace.columns = {"iteration", "increment"};
  for (std::size_t i = 0; i < diag.increments.size(); ++i) {
    trace.rows.push_back({fmt(static_cast<long>(i + 1)), fmt(diag.increments[i])});
  }
  r.trace = std::move(trace);

  r.results["iterations"] = diag.iterations;
  r.results["final_residual"] = diag.final_residual;
  r.results["lipschitz_constant"] = lipschitz_constant(c.alpha, c.theta);
  r.results["sup_distance_to_one"] = sup_to_one;
  try {
    r.results["contraction_ratio"] = contraction_ratio(diag);
  } catch (const InsufficientDataError&) {
  }
  if (diag.clamp_count > 0) {
    r.warnings.push_back("clamped " + std::to_string(diag.clamp_count) +
                         " operator evaluations into [0,1], max excess " +
                         fmt(diag.max_clamp_excess));
  }
  return r;
}

RunResult run_bessel_residual(const Config& c) {
  RunResult r;
  r.params = {{"theta", c.theta},
              {"s_max", c.s_max},
              {"knots_per_decade", c.knots_per_decade}};
  const auto rep = verify_bessel_fixed_point(c.theta, c.s_max, c.knots_per_decade);
  r.table.columns = {"s", "f", "t_of_f", "residual"};
  for (std::size_t i = 0; i < rep.knots.size(); ++i) {
    r.table.rows.push_back({fmt(rep.knots[i]), fmt(rep.f[i]), fmt(rep.Tf[i]),
                            fmt(rep.Tf[i] - rep.f[i])});
  }
  r.results["max_residual"] = rep.max_residual;
  return r;
}

RunResult run_soup1d_cover(const Config& c) {
  RunResult r;
  r.params = {{"theta", c.theta}, {"s", c.s}, {"epsilon", c.epsilon}, {"n", c.n}};
  const McEstimate est = covering_probability(c.theta, c.s, c.epsilon, c.n, c.rng());
  r.table.columns = {"theta", "s", "epsilon", "estimate", "std_error", "n"};
  r.table.rows.push_back({fmt(c.theta), fmt(c.s), fmt(c.epsilon), fmt(est.estimate),
                          fmt(est.std_error), fmt(est.n)});
  r.results["complement_estimate"] = 1.0 - est.estimate;
  return r;
}

RunResult run_arcsine(const Config& c) {
  RunResult r;
  r.params = {{"theta", c.theta},
              {"s", c.s},
              {"epsilon", c.epsilon},
              {"n", c.n},
              {"delta0", c.delta0}};
  const auto stat =
      last_uncovered_statistic(c.theta, c.s, c.epsilon, c.n, c.rng(), c.delta0);
  r.table.columns = {"replica", "ratio"};
  for (std::size_t i = 0; i < stat.ratios.size(); ++i) {
    r.table.rows.push_back({fmt(static_cast<long>(i)), fmt(stat.ratios[i])});
  }
  const double theta = c.theta;
  r.results["ks_arcsine"] =
      ks_distance(stat.ratios, [theta](double t) { return arcsine_cdf(t, theta); });
  r.results["delta0"] = stat.delta0;
  r.results["clamped"] = stat.clamped;
  if (stat.clamped > 0) {
    r.warnings.push_back(std::to_string(stat.clamped) +
                         " replicas clamped at the window edge");
  }
  return r;
}

RunResult run_besq_check(const Config& c) {
  RunResult r;
  r.params = {{"theta", c.theta}, {"x0", c.x0}, {"t", c.t_horizon}, {"n", c.n}};
  if (c.n < 2) throw std::invalid_argument("besq-check: need n >= 2");
  const RngStream rng = c.rng();
  std::vector<double> xs(static_cast<std::size_t>(c.n));
  for (long i = 0; i < c.n; ++i) {
    const auto path = besq_sample_path(c.theta, c.x0, {0.0, c.t_horizon},
                                       rng.replica(static_cast<std::uint64_t>(i)));
    xs[static_cast<std::size_t>(i)] = path.values.back();
  }
  const double dn = static_cast<double>(c.n);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= dn;
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d2 = (x - mean) * (x - mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  const double var = m2 / (dn - 1.0);
  const double se_mean = std::sqrt(var / dn);
  const double se_var = std::sqrt((m4 / dn - var * var) / dn);
  const double expected_mean = c.x0 + 2.0 * c.theta * c.t_horizon;
  const double expected_var =
      4.0 * c.theta * c.t_horizon * c.t_horizon + 4.0 * c.x0 * c.t_horizon;

  const auto deaths =
      excursion_death_time_samples(c.theta, c.n, rng.replica(static_cast<std::uint64_t>(c.n)));
  const double theta = c.theta;
  const double death_ks =
      ks_distance(deaths, [theta](double u) { return death_time_cdf(u, theta); });

  r.table.columns = {"statistic", "value"};
  const auto put = [&](const char* name, double v) {
    r.table.rows.push_back({name, fmt(v)});
  };
  put("n", static_cast<double>(c.n));
  put("mean", mean);
  put("expected_mean", expected_mean);
  put("mean_z", (mean - expected_mean) / se_mean);
  put("variance", var);
  put("expected_variance", expected_var);
  put("variance_z", (var - expected_var) / se_var);
  put("death_ks", death_ks);
  r.results["mean_z"] = (mean - expected_mean) / se_mean;
  r.results["variance_z"] = (var - expected_var) / se_var;
  r.results["death_ks"] = death_ks;
  return r;
}

RunResult run_annulus_kernel(const Config& c) {
  RunResult r;
  r.params = {{"q", c.q}, {"angle_count", c.angle_count}, {"n_terms", c.n_terms}};
  if (c.angle_count < 2) throw std::invalid_argument("annulus-kernel: angle_count >= 2");
  const double pi = 3.141592653589793238462643383279502884;
  const double f0 = annulus_inner_kernel_series(c.q, 0.0, c.n_terms).value;
  r.table.columns = {"angle", "value", "d_angle", "d2_angle"};
  double flatness = 0.0;
  double trapz = 0.0;
  for (int k = 0; k < c.angle_count; ++k) {
    const double ang = -pi + 2.0 * pi * static_cast<double>(k) / c.angle_count;
    const auto v = annulus_inner_kernel_series(c.q, ang, c.n_terms);
    r.table.rows.push_back({fmt(ang), fmt(v.value), fmt(v.d_angle), fmt(v.d2_angle)});
    flatness = std::max(flatness, std::fabs(v.value / f0 - 1.0));
    trapz += v.value * 2.0 * pi / c.angle_count;
  }
  r.results["flatness"] = flatness;
  r.results["integral_quadrature"] = trapz;
  r.results["integral_exact"] = 4.0 / (c.q * std::fabs(std::log(c.q)));
  return r;
}

RunResult run_crossing_measure(const Config& c) {
  RunResult r;
  if (c.mode == "annulus") {
    r.params = {{"mode", c.mode}, {"r1", c.r1}, {"r2", c.r2}, {"theta", c.theta}};
    r.table.columns = {"r1", "r2", "measure", "d_measure_dr1"};
    r.table.rows.push_back({fmt(c.r1), fmt(c.r2),
                            fmt(annulus_crossing_measure(c.r1, c.r2)),
                            fmt(annulus_crossing_measure_dr1(c.r1, c.r2))});
    r.results["single_loop_prob"] = single_loop_crossing_prob(c.theta, c.r1, c.r2);
    return r;
  }
  const Point2 x{0.0, 0.0};
  const Point2 y{c.d, 0.0};
  if (c.mode == "two-annuli") {
    r.params = {{"mode", c.mode}, {"d", c.d},         {"rx", c.rx},
                {"ry", c.ry},     {"R", c.R},         {"regime_A", c.regime_A}};
    r.table.columns = {"d", "rx", "ry", "measure"};
    std::vector<std::string> row{fmt(c.d), fmt(c.rx), fmt(c.ry),
                                 fmt(two_annuli_measure(x, y, c.rx, c.ry, c.regime_A))};
    if (c.R > 0.0) {
      r.table.columns.push_back("measure_with_outer");
      row.push_back(
          fmt(two_annuli_measure_with_outer(x, y, c.rx, c.ry, c.R, c.regime_A)));
    }
    r.table.rows.push_back(std::move(row));
    return r;
  }
  if (c.mode == "three-crossings") {
    if (!(c.R > 0.0)) throw std::invalid_argument("three-crossings: need --R > 0");
    r.params = {{"mode", c.mode}, {"d", c.d},         {"rx", c.rx},
                {"ry", c.ry},     {"R", c.R},         {"theta", c.theta},
                {"regime_A", c.regime_A}};
    const auto b = three_crossings_bound(x, y, c.rx, c.ry, c.R, c.theta, c.regime_A);
    r.table.columns = {"scenario", "bound"};
    r.table.rows.push_back({"single_loop", fmt(b.single_loop)});
    r.table.rows.push_back({"pair_bridge", fmt(b.pair_bridge)});
    r.table.rows.push_back({"pair_x_deep", fmt(b.pair_x_deep)});
    r.table.rows.push_back({"pair_y_deep", fmt(b.pair_y_deep)});
    r.table.rows.push_back({"triple", fmt(b.triple)});
    r.table.rows.push_back({"total", fmt(b.total())});
    r.results["total"] = b.total();
    return r;
  }
  throw std::invalid_argument("crossing-measure: unknown mode '" + c.mode + "'");
}

RunResult run_wos_hit(const Config& c) {
  RunResult r;
  if (c.targets_str.empty()) {
    throw std::invalid_argument("wos-hit: need at least one --target 'x,y,r'");
  }
  WosDomain dom;
  dom.outer_radius = c.outer_radius;
  if (!c.absorber_str.empty()) dom.inner_absorber = parse_disc(c.absorber_str);
  std::vector<Disc> targets;
  for (const auto& t : c.targets_str) targets.push_back(parse_disc(t));
  r.params = {{"start", c.start_str},
              {"outer_radius", c.outer_radius},
              {"targets", c.targets_str},
              {"absorber", c.absorber_str},
              {"n", c.n}};
  long stuck = 0;
  const McEstimate est =
      wos_hitting_prob(parse_point(c.start_str), targets, dom, c.n, c.rng(), &stuck);
  r.table.columns = {"estimate", "std_error", "n", "n_stuck"};
  r.table.rows.push_back({fmt(est.estimate), fmt(est.std_error), fmt(est.n), fmt(stuck)});
  if (stuck > 0) {
    r.warnings.push_back(std::to_string(stuck) +
                         " walks exceeded the step budget and count as misses");
  }
  return r;
}

RunResult run_soup2d_cross(const Config& c) {
  RunResult r;
  r.params = {{"theta", c.theta_list}, {"annuli", c.annuli_str}, {"n", c.n},
              {"t_min", c.t_min},      {"t_max", c.t_max},       {"steps", c.steps},
              {"delta", c.delta}};
  const auto rows = crossing_probability_scan(parse_list(c.theta_list),
                                              parse_annuli(c.annuli_str),
                                              soup_config(c), c.n, c.rng());
  r.table.columns = {"theta", "r_in", "r_out", "estimate", "std_error", "n"};
  for (const auto& row : rows) {
    r.table.rows.push_back({fmt(row.theta), fmt(row.r_in), fmt(row.r_out),
                            fmt(row.est.estimate), fmt(row.est.std_error),
                            fmt(row.est.n)});
  }
  return r;
}

RunResult run_surround_scan(const Config& c) {
  RunResult r;
  r.params = {{"theta", c.theta}, {"radii", c.radii}, {"n", c.n},
              {"t_min", c.t_min}, {"t_max", c.t_max}, {"steps", c.steps}};
  const auto scan =
      surround_probability_scan(c.theta, parse_list(c.radii), soup_config(c), c.n,
                                c.rng());
  r.table.columns = {"r", "estimate", "std_error", "n", "slope", "intercept"};
  for (const auto& row : scan.rows) {
    r.table.rows.push_back({fmt(row.r), fmt(row.est.estimate), fmt(row.est.std_error),
                            fmt(row.est.n), fmt(scan.slope), fmt(scan.intercept)});
  }
  r.results["slope"] = scan.slope;
  r.results["intercept"] = scan.intercept;
  return r;
}

RunResult run_capacity(const Config& c) {
  RunResult r;
  r.params = {{"alpha", c.alpha_list}, {"cloud", c.cloud},   {"h", c.h_list},
              {"ratio", c.cantor_ratio}, {"levels", c.levels}, {"gap_tol", c.gap_tol}};
  std::vector<PointCloud> family;
  if (c.cloud == "segment" || c.cloud == "circle") {
    for (double h : parse_list(c.h_list)) {
      family.push_back(c.cloud == "segment" ? segment_cloud(h) : circle_cloud(h));
    }
  } else if (c.cloud == "cantor") {
    for (double lvl : parse_list(c.levels)) {
      family.push_back(cantor_cloud(c.cantor_ratio, static_cast<int>(lvl)));
    }
  } else {
    // a CSV point list, one x,y per row; the h list supplies the resolutions
    std::ifstream in(c.cloud);
    if (!in) throw IoError("cannot open cloud file '" + c.cloud + "'");
    std::vector<Point2> pts;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      pts.push_back(parse_point(line));
    }
    if (pts.empty()) throw std::invalid_argument("cloud file has no points");
    for (double h : parse_list(c.h_list)) {
      PointCloud cloud;
      cloud.points = pts;
      cloud.resolution = h;
      family.push_back(std::move(cloud));
    }
  }

  const FrankWolfeConfig fw{c.gap_tol, c.fw_max_iter};
  r.table.columns = {"alpha", "h", "n_points", "min_energy", "capacity", "gap",
                     "iterations"};
  std::vector<double> alphas = parse_list(c.alpha_list);
  for (double alpha : alphas) {
    std::vector<double> caps;
    for (const PointCloud& cloud : family) {
      const auto res = minimize_energy(cloud, alpha, cloud.resolution, fw);
      caps.push_back(1.0 / res.energy);
      r.table.rows.push_back({fmt(alpha), fmt(cloud.resolution),
                              fmt(static_cast<long>(cloud.points.size())),
                              fmt(res.energy), fmt(1.0 / res.energy),
                              fmt(res.duality_gap), fmt(res.iterations)});
      if (!res.converged) {
        r.warnings.push_back("minimizer hit the iteration cap at alpha " + fmt(alpha) +
                             ", h " + fmt(cloud.resolution));
      }
    }
    if (family.size() >= 2) {
      const double ratio = caps.back() / caps.front();
      r.results["trend"][fmt(alpha)] = ratio < 0.3   ? "decaying_to_zero"
                                       : ratio > 0.7 ? "bounded_below"
                                                     : "indeterminate";
      r.results["ratio"][fmt(alpha)] = ratio;
    }
  }
  for (const PointCloud& cloud : family) {
    if (!resolution_consistent(cloud)) {
      r.warnings.push_back("cloud at h " + fmt(cloud.resolution) +
                           " is coarser than its resolution; the diagonal floor "
                           "is unsupported by any pair distance");
      break;
    }
  }
  return r;
}

RunResult run_tau_theta(const Config& c) {
  RunResult r;
  r.params = {{"theta", c.tau_theta_list}};
  r.table.columns = {"theta", "tau", "trace_at_tau"};
  for (double th : parse_list(c.tau_theta_list)) {
    const double tau = tau_theta(th);
    r.table.rows.push_back({fmt(th), fmt(tau), fmt(circle_heat_trace(tau))});
  }
  return r;
}

RunResult run_tail_divergence(const Config& c) {
  RunResult r;
  r.params = {{"theta", c.theta}, {"s_ends", c.s_ends}, {"fit_from", c.fit_from}};
  const auto scan = tail_divergence_scan(c.theta, parse_list(c.s_ends));
  r.table.columns = {"s_end", "integral"};
  for (const auto& [s_end, integral] : scan) {
    r.table.rows.push_back({fmt(s_end), fmt(integral)});
  }
  const double from = c.fit_from > 0.0 ? c.fit_from : scan.front().first;
  const auto fit = fit_against_log(scan, from);
  r.results["slope"] = fit.slope;
  r.results["intercept"] = fit.intercept;
  r.results["max_abs_residual"] = fit.max_abs_residual;
  r.results["asymptotic_constant"] = f_infty_asymptotic_constant(c.theta);
  return r;
}

using Runner = RunResult (*)(const Config&);

const std::map<std::string, Runner> kRunners = {
    {"finfty-table", run_finfty_table},
    {"fixed-point", run_fixed_point},
    {"bessel-residual", run_bessel_residual},
    {"soup1d-cover", run_soup1d_cover},
    {"arcsine", run_arcsine},
    {"besq-check", run_besq_check},
    {"annulus-kernel", run_annulus_kernel},
    {"crossing-measure", run_crossing_measure},
    {"wos-hit", run_wos_hit},
    {"soup2d-cross", run_soup2d_cross},
    {"surround-scan", run_surround_scan},
    {"capacity", run_capacity},
    {"tau-theta", run_tau_theta},
    {"tail-divergence", run_tail_divergence},
};

RunResult dispatch(const std::string& command, const Config& cfg) {
  const Runner fn = kRunners.at(command);
  if (cfg.sweep.empty()) return fn(cfg);

  const auto eq = cfg.sweep.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument("sweep must look like 'name=v1,v2,...'");
  }
  const std::string name = cfg.sweep.substr(0, eq);
  const auto field = kSweepable.find(name);
  if (field == kSweepable.end()) {
    throw std::invalid_argument("unknown sweep parameter '" + name + "'");
  }
  const std::vector<double> values = parse_list(cfg.sweep.substr(eq + 1));

  RunResult agg;
  agg.params = {{"sweep", cfg.sweep}};
  agg.results["sweep"] = json::array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    Config sub = cfg;
    sub.*(field->second) = values[i];
    sub.stream = static_cast<std::uint64_t>(i + 1) << 32;
    RunResult one = fn(sub);
    if (i == 0) {
      agg.table.columns = one.table.columns;
      agg.table.columns.insert(agg.table.columns.begin(), name);
      agg.params["base"] = one.params;
    }
    for (auto& row : one.table.rows) {
      row.insert(row.begin(), fmt(values[i]));
      agg.table.rows.push_back(std::move(row));
    }
    agg.results["sweep"].push_back(
        {{"value", values[i]}, {"results", std::move(one.results)}});
    for (const auto& w : one.warnings) {
      agg.warnings.push_back(name + "=" + fmt(values[i]) + ": " + w);
    }
  }
  return agg;
}

std::string csv_text(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += t.columns[i];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  f.flush();
  if (!f.good()) throw IoError("write failed for '" + path + "'");
}

std::string path_stem(const std::string& path) {
  const auto slash = path.find_last_of("/\\");
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path;
  }
  return path.substr(0, dot);
}

void emit(const std::string& command, const Config& cfg, const RunResult& r,
          const std::string& started_at, double runtime_ms) {
  for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

  if (cfg.out.empty()) {
    std::fputs(csv_text(r.table).c_str(), stdout);
    return;
  }

  json env;
  env["command"] = command;
  env["params"] = r.params;
  env["seed"] = std::to_string(cfg.seed);
  env["threads"] = cfg.threads;
  env["version"] = kVersion;
  env["started_at"] = started_at;
  env["runtime_ms"] = runtime_ms;
  env["columns"] = r.table.columns;
  env["rows"] = r.table.rows;
  env["results"] = r.results;
  env["warnings"] = r.warnings;

  if (cfg.format == "json") {
    write_file(cfg.out, env.dump(2) + "\n");
  } else {
    write_file(cfg.out, csv_text(r.table));
    write_file(path_stem(cfg.out) + ".json", env.dump(2) + "\n");
  }
  if (r.trace) {
    write_file(path_stem(cfg.out) + "_trace.csv", csv_text(*r.trace));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for loop-soup crossing probabilities"};
  app.require_subcommand(1);

  Config cfg;
  cfg.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "base RNG seed")->envname("LOOPSOUP_SEED");
    sub->add_option("--threads", cfg.threads, "worker cap (all runs are serial today)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", cfg.out, "output CSV path; JSON envelope goes alongside");
    sub->add_option("--format", cfg.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--sweep", cfg.sweep, "vary one parameter: 'name=v1,v2,...'");
  };

  {
    auto* sub = app.add_subcommand("finfty-table", "crossing law f_infty on an s grid");
    sub->add_option("--theta", cfg.theta, "intensity");
    sub->add_option("--s", cfg.s_grid, "comma list of s values");
    add_common(sub);
  }
  {
    auto* sub = app.add_subcommand("fixed-point", "Banach iteration of the crossing operator");
    sub->add_option("--theta", cfg.theta, "intensity");
    sub->add_option("--alpha", cfg.alpha, "weight exponent of the iteration norm");
    sub->add_option("--s-max", cfg.s_max, "grid endpoint");
    sub->add_option("--knots-per-decade", cfg.knots_per_decade, "grid density");
    sub->add_option("--tol", cfg.tol, "weighted increment tolerance");
    sub->add_option("--max-iter", cfg.max_iter, "iteration cap");
    sub->add_option("--start", cfg.start_value, "constant starting function");
    add_common(sub);
  }
  {
    auto* sub = app.add_subcommand("bessel-residual", "operator residual of the exact law");
    sub->add_option("--theta", cfg.theta, "intensity");
    sub->add_option("--s-max", cfg.s_max, "grid endpoint");
    sub->add_option("--knots-per-decade", cfg.knots_per_decade, "grid density");
    add_common(sub);
  }
  {
    auto* sub = app.add_subcommand("soup1d-cover", "interval soup covering probability");
    sub->add_option("--theta", cfg.theta, "intensity");
    sub->add_option("--s", cfg.s, "window endpoint");
    sub->add_option("--epsilon", cfg.epsilon, "length cutoff");
    sub->add_option("--n", cfg.n, "replicas");
    add_common(sub);
  }
  {
    auto* sub = app.add_subcommand("arcsine", "law of the last uncovered point");
    sub->add_option("--theta", cfg.theta, "intensity");
    sub->add_option("--s", cfg.s, "window endpoint");
    sub->add_option("--epsilon", cfg.epsilon, "length cutoff");
    sub->add_option("--n", cfg.n, "replicas");
    sub->add_option("--delta0", cfg.delta0, "inner standoff, 0 for 10*epsilon");
    add_common(sub);
  }
  {
    auto* sub = app.add_subcommand("besq-check", "squared Bessel moments and death times");
    sub->add_option("--theta", cfg.theta, "half dimension");
    sub->add_option("--x0", cfg.x0, "starting value");
    sub->add_option("--t", cfg.t_horizon, "horizon");
    sub->add_option("--n", cfg.n, "replicas");
    add_common(sub);
  }
  {
    auto* sub = app.add_subcommand("annulus-kernel", "boundary kernel theta series");
    sub->add_option("--q", cfg.q, "inner radius of the annulus");
    sub->add_option("--angle-count", cfg.angle_count, "grid points over [-pi, pi)");
    sub->add_option("--n-terms", cfg.n_terms, "series terms, 0 for automatic");
    add_common(sub);
  }
  {
    auto* sub = app.add_subcommand("crossing-measure", "loop measure of crossing events");
    sub->add_option("--mode", cfg.mode, "annulus, two-annuli, or three-crossings");
    sub->add_option("--r1", cfg.r1, "inner radius (annulus mode)");
    sub->add_option("--r2", cfg.r2, "outer radius (annulus mode)");
    sub->add_option("--d", cfg.d, "distance between the two points");
    sub->add_option("--rx", cfg.rx, "disc radius at x");
    sub->add_option("--ry", cfg.ry, "disc radius at y");
    sub->add_option("--R", cfg.R, "outer scale");
    sub->add_option("--theta", cfg.theta, "intensity");
    sub->add_option("--regime-A", cfg.regime_A, "asymptotic regime guard multiplier");
    add_common(sub);
  }
  {
    auto* sub = app.add_subcommand("wos-hit", "walk on spheres hitting probability");
    sub->add_option("--start", cfg.start_str, "start point 'x,y'");
    sub->add_option("--outer-radius", cfg.outer_radius, "absorbing outer circle");
    sub->add_option("--target", cfg.targets_str, "target disc 'x,y,r', repeatable");
    sub->add_option("--absorber", cfg.absorber_str, "absorbing disc 'x,y,r'");
    sub->add_option("--n", cfg.n, "walks");
    add_common(sub);
  }
  {
    auto* sub = app.add_subcommand("soup2d-cross", "cluster crossing frequencies");
    sub->add_option("--theta", cfg.theta_list, "comma list of intensities");
    sub->add_option("--annuli", cfg.annuli_str, "annuli 'r_in:r_out,...'");
    sub->add_option("--n", cfg.n, "soups");
    sub->add_option("--t-min", cfg.t_min, "shortest loop duration");
    sub->add_option("--t-max", cfg.t_max, "longest loop duration");
    sub->add_option("--steps", cfg.steps, "vertices per loop");
    sub->add_option("--diam-min", cfg.diam_min, "discard smaller loops");
    sub->add_option("--region-radius", cfg.region_radius, "anchor sampling radius");
    sub->add_option("--delta", cfg.delta, "cluster merge distance, 0 for automatic");
    add_common(sub);
  }
  {
    auto* sub = app.add_subcommand("surround-scan", "single loop surround probabilities");
    sub->add_option("--theta", cfg.theta, "intensity");
    sub->add_option("--radii", cfg.radii, "comma list of disc radii");
    sub->add_option("--n", cfg.n, "soups");
    sub->add_option("--t-min", cfg.t_min, "shortest loop duration");
    sub->add_option("--t-max", cfg.t_max, "longest loop duration");
    sub->add_option("--steps", cfg.steps, "vertices per loop");
    add_common(sub);
  }
  {
    auto* sub = app.add_subcommand("capacity", "log^alpha capacity of point clouds");
    sub->add_option("--alpha", cfg.alpha_list, "comma list of exponents");
    sub->add_option("--cloud", cfg.cloud, "segment, circle, cantor, or a CSV path");
    sub->add_option("--resolutions", cfg.h_list, "comma list of resolutions");
    sub->add_option("--ratio", cfg.cantor_ratio, "cantor contraction ratio");
    sub->add_option("--levels", cfg.levels, "cantor depths, comma list");
    sub->add_option("--gap-tol", cfg.gap_tol, "duality gap tolerance");
    sub->add_option("--max-iter", cfg.fw_max_iter, "minimizer iteration cap");
    add_common(sub);
  }
  {
    auto* sub = app.add_subcommand("tau-theta", "large loop threshold time");
    sub->add_option("--theta", cfg.tau_theta_list, "comma list of intensities");
    add_common(sub);
  }
  {
    auto* sub = app.add_subcommand("tail-divergence", "logarithmic tail of the crossing integral");
    sub->add_option("--theta", cfg.theta, "intensity");
    sub->add_option("--s-ends", cfg.s_ends, "comma list of integration endpoints");
    sub->add_option("--fit-from", cfg.fit_from, "fit window start, 0 for all");
    add_common(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  std::time_t tt = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));

  try {
    const auto t0 = std::chrono::steady_clock::now();
    const RunResult result = dispatch(command, cfg);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    emit(command, cfg, result, stamp, ms);
    return 0;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const InsufficientDataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
