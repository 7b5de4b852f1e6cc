#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "lvbal/balancing.hpp"
#include "lvbal/threephase.hpp"

namespace {

std::vector<lvbal::PhaseVector> random_triples(std::size_t count) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<lvbal::PhaseVector> out(count);
  for (auto& p : out) {
    for (auto& x : p) x = u(rng);
  }
  return out;
}

void BM_SolveMixedSign(benchmark::State& state) {
  const auto triples = random_triples(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lvbal::solve_mixed_sign({triples[i++ & 1023]}));
  }
}
BENCHMARK(BM_SolveMixedSign);

void BM_DecideBalancing(benchmark::State& state) {
  const auto triples = random_triples(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lvbal::decide_balancing({triples[i++ & 1023]}));
  }
}
BENCHMARK(BM_DecideBalancing);

void BM_UnbalanceMetrics(benchmark::State& state) {
  const auto triples = random_triples(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    lvbal::PhasePowers pp;
    pp.p_load = triples[i++ & 1023];
    benchmark::DoNotOptimize(lvbal::unbalance_metrics(pp, 230.0, {0.05, 0.0}));
  }
}
BENCHMARK(BM_UnbalanceMetrics);

}  // namespace
