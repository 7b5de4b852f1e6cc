#include "lvbal/cli/templates.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "lvbal/errors.hpp"

namespace lvbal::cli {
namespace {

constexpr std::size_t kDaySteps = 1440;

double daily_load(double hour) {
  const auto bump = [](double h, double centre, double width) {
    const double u = (h - centre) / width;
    return std::exp(-u * u);
  };
  return 0.25 + 0.6 * bump(hour, 7.5, 1.2) + 1.0 * bump(hour, 19.0, 2.0);
}

double clear_sky_pv(double hour, double peak) {
  if (hour <= 6.0 || hour >= 20.0) return 0.0;
  return peak * std::sin(kPi * (hour - 6.0) / 14.0);
}

Scenario base_scenario(std::size_t n) {
  Scenario sc;
  sc.profiles = "profiles.csv";
  sc.config.horizon = kDaySteps;
  for (std::size_t i = 0; i < n; ++i) {
    HouseholdSpec h;
    h.id = static_cast<int>(i + 1);
    h.bus = 1;
    h.phase = static_cast<Phase>(i * 3 / n);
    sc.households.push_back(h);
  }
  return sc;
}

}  // namespace

const std::vector<std::string>& template_names() {
  static const std::vector<std::string> names = {"nine-house", "balanced",
                                                 "single-phase-load"};
  return names;
}

Generated make_template(std::string_view name, std::size_t households,
                        std::uint64_t seed) {
  const auto& names = template_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw ConfigError(fmt::format("unknown template '{}' (available: {})", name,
                                  fmt::join(names, ", ")));
  }
  if (households < 3) {
    throw ConfigError("a template needs at least 3 households");
  }

  Generated g;
  g.scenario = base_scenario(households);
  g.scenario.config.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> scale(0.8, 1.2);
  std::normal_distribution<double> jitter(0.0, 0.05);

  for (const auto& h : g.scenario.households) {
    auto& series = g.profiles[h.id];
    series.load_kw.resize(kDaySteps);
    series.pv_kw.resize(kDaySteps);
    if (name == "nine-house") {
      const double s = scale(rng);
      const double peak = h.phase == Phase::a ? 4.0 : 0.5;
      for (std::size_t t = 0; t < kDaySteps; ++t) {
        const double hour = static_cast<double>(t) / 60.0;
        series.load_kw[t] = std::max(0.05, s * daily_load(hour) + jitter(rng));
        series.pv_kw[t] = clear_sky_pv(hour, peak);
      }
    } else if (name == "balanced") {
      for (std::size_t t = 0; t < kDaySteps; ++t) {
        const double hour = static_cast<double>(t) / 60.0;
        series.load_kw[t] = daily_load(hour);
        series.pv_kw[t] = clear_sky_pv(hour, 2.0);
      }
    } else {
      const double load = h.phase == Phase::a ? 3.0 / std::ceil(households / 3.0) : 0.0;
      std::fill(series.load_kw.begin(), series.load_kw.end(), load);
    }
  }
  return g;
}

}  // namespace lvbal::cli
