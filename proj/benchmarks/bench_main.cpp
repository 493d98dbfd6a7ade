// Microbenchmarks for the hot paths: kernel evaluations, one operator
// application, soup sampling, and the WoS inner loop.
#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "loopsoup/capacity.hpp"
#include "loopsoup/fixed_point.hpp"
#include "loopsoup/planar.hpp"
#include "loopsoup/rng.hpp"
#include "loopsoup/soup1d.hpp"
#include "loopsoup/special.hpp"

using namespace loopsoup;

namespace {

void BM_FInfty(benchmark::State& state) {
  double s = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f_infty(s, 0.37));
    s = s < 1e4 ? s * 1.001 : 1.0;
  }
}
BENCHMARK(BM_FInfty);

void BM_Hyp2f1NearOne(benchmark::State& state) {
  double z = 0.90;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hyp2f1(0.5, 0.5, 1.0, z));
    z = z < 0.999 ? z + 1e-5 : 0.90;
  }
}
BENCHMARK(BM_Hyp2f1NearOne);

void BM_ApplyOperator(benchmark::State& state) {
  const auto grid = make_crossing_grid(1e4, state.range(0));
  const auto f = constant_function(grid, 0.5, -0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply_T(f, 0.5));
  }
  state.SetLabel(std::to_string(grid.size()) + " knots");
}
BENCHMARK(BM_ApplyOperator)->Arg(50)->Arg(200);

void BM_IntervalSoupReplica(benchmark::State& state) {
  const double epsilon = 1.0 / static_cast<double>(state.range(0));
  long replica = 0;
  const RngStream base{7, 0};
  for (auto _ : state) {
    const auto sample = sample_interval_soup(0.5, 1.0, 2.0, epsilon, base.replica(replica++));
    benchmark::DoNotOptimize(covers_window(sample, 1.0, 2.0));
  }
}
BENCHMARK(BM_IntervalSoupReplica)->Arg(100)->Arg(10000);

void BM_AnnulusKernel(benchmark::State& state) {
  double angle = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(annulus_inner_kernel_series(1e-3, angle));
    angle = angle < 3.0 ? angle + 1e-3 : -3.0;
  }
}
BENCHMARK(BM_AnnulusKernel);

void BM_WosAnnulus(benchmark::State& state) {
  const WosDomain dom{1.0, std::nullopt};
  const std::vector<Disc> targets = {Disc{{0.0, 0.0}, 0.1}};
  std::uint64_t stream = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        wos_hitting_prob({0.4, 0.0}, targets, dom, 1000, {11, stream++}));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_WosAnnulus);

void BM_LoopSoupSample(benchmark::State& state) {
  SoupConfig cfg;
  std::uint64_t stream = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_loop_soup_2d(0.5, cfg, {13, stream++}));
  }
}
BENCHMARK(BM_LoopSoupSample);

void BM_ClusterForest(benchmark::State& state) {
  SoupConfig cfg;
  const auto soup = sample_loop_soup_2d(1.0, cfg, {17, 0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_clusters(soup.loops, 0.05));
  }
  state.SetLabel(std::to_string(soup.loops.size()) + " loops");
}
BENCHMARK(BM_ClusterForest);

void BM_CapacityMinimize(benchmark::State& state) {
  const auto cloud = segment_cloud(1.0 / static_cast<double>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(minimize_energy(cloud, 1.0, cloud.resolution));
  }
}
BENCHMARK(BM_CapacityMinimize)->Arg(32)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
