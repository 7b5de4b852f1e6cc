#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "lvbal/clustering.hpp"
#include "lvbal/graph.hpp"

namespace {

struct Inputs {
  std::vector<double> x;
  std::vector<double> z;
};

Inputs ring_inputs(std::size_t n) {
  std::mt19937_64 rng(n);
  std::normal_distribution<double> noise(0.0, 2.0);
  const double nominal[3] = {0.0, -120.0, 120.0};
  Inputs in;
  for (std::size_t i = 0; i < n; ++i) {
    in.x.push_back(nominal[i * 3 / n] + noise(rng));
    in.z.push_back(std::sin(0.7 * static_cast<double>(i)));
  }
  return in;
}

// Cold start from the nominal priors.
void BM_ConvergeCold(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = lvbal::ring_graph(n, 1.0);
  const auto in = ring_inputs(n);
  lvbal::ClusterConfig cfg;
  cfg.max_iter = 1000000;
  std::size_t iterations = 0;
  for (auto _ : state) {
    auto s = lvbal::init_estimator(in.x, in.z, lvbal::nominal_phase_priors(3),
                                   lvbal::Metric::circular);
    const auto r = lvbal::converge_in_place(s, g, cfg, in.x, in.z);
    iterations = r.iterations;
    benchmark::DoNotOptimize(s.zbar.data());
  }
  state.counters["inner_iterations"] = static_cast<double>(iterations);
}
BENCHMARK(BM_ConvergeCold)->Arg(9)->Arg(18)->Arg(36)->Unit(benchmark::kMillisecond);

// Warm start after a small change in the auxiliary inputs, as in the outer loop.
void BM_ConvergeWarm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = lvbal::ring_graph(n, 1.0);
  auto in = ring_inputs(n);
  lvbal::ClusterConfig cfg;
  auto s = lvbal::init_estimator(in.x, in.z, lvbal::nominal_phase_priors(3),
                                 lvbal::Metric::circular);
  (void)lvbal::converge_in_place(s, g, cfg, in.x, in.z);
  double t = 0.0;
  for (auto _ : state) {
    t += 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      in.z[i] = std::sin(0.7 * static_cast<double>(i) + 0.01 * t);
    }
    benchmark::DoNotOptimize(lvbal::converge_in_place(s, g, cfg, in.x, in.z));
  }
}
BENCHMARK(BM_ConvergeWarm)->Arg(9)->Arg(18)->Unit(benchmark::kMillisecond);

}  // namespace
