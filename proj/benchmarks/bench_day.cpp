#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "lvbal/engine.hpp"

namespace {

// Nine households over one bus with a midday PV bump and evening load peak.
lvbal::Scenario synthetic_day(std::size_t steps, lvbal::ProfileSet& profiles) {
  lvbal::Scenario sc;
  sc.config.horizon = steps;
  for (int i = 0; i < 9; ++i) {
    lvbal::HouseholdSpec h;
    h.id = i + 1;
    h.bus = 1;
    h.phase = static_cast<lvbal::Phase>(i / 3);
    sc.households.push_back(h);
    auto& p = profiles[h.id];
    for (std::size_t t = 0; t < steps; ++t) {
      const double hour = 24.0 * static_cast<double>(t) / static_cast<double>(steps);
      const double sun = std::max(0.0, std::sin(std::numbers::pi * (hour - 6.0) / 12.0));
      p.pv_kw.push_back((2.0 + 0.4 * i) * sun);
      p.load_kw.push_back(0.3 + 0.1 * i + 1.5 * std::exp(-std::pow(hour - 19.0, 2)));
    }
  }
  return sc;
}

void BM_DayRun(benchmark::State& state) {
  const auto steps = static_cast<std::size_t>(state.range(0));
  lvbal::ProfileSet profiles;
  const auto sc = synthetic_day(steps, profiles);
  const auto households = lvbal::make_households(sc, profiles);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lvbal::run(sc.config, households));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(steps));
}
BENCHMARK(BM_DayRun)->Arg(144)->Arg(1440)->Unit(benchmark::kMillisecond);

}  // namespace
