// Acceptance suite: one line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "generators.hpp"
#include "lvbal/cli/templates.hpp"
#include "lvbal/clustering.hpp"
#include "lvbal/engine.hpp"
#include "lvbal/records.hpp"
#include "reference.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

lvbal::Phase nearest_phase(double angle_deg) {
  const std::vector<double> nominal{0.0, -120.0, 120.0};
  return static_cast<lvbal::Phase>(
      lvbal::assign_cluster(angle_deg, nominal, lvbal::Metric::circular));
}

// 1. Nine households on a ring, sigma = 2 deg, 50 seeds.
Outcome clustering_correctness() {
  const auto g = lvbal::ring_graph(9, 1.0);
  std::size_t perfect = 0;
  double worst_time = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    lvbal::Scenario sc;
    sc.config.seed = seed;
    sc.config.angle_noise_deg = 2.0;
    lvbal::ProfileSet p;
    for (int i = 0; i < 9; ++i) {
      lvbal::HouseholdSpec h;
      h.id = i + 1;
      h.phase = static_cast<lvbal::Phase>(i / 3);
      sc.households.push_back(h);
      p[i + 1] = {{1.0 + 0.1 * i}, {0.0}};
    }
    const auto hh = lvbal::make_households(sc, p);
    std::vector<double> x, z;
    for (const auto& h : hh) {
      x.push_back(h.measured_angle_deg);
      z.push_back(h.pv_kw[0] - h.load_kw[0]);
    }
    const auto t0 = Clock::now();
    auto s = lvbal::init_estimator(x, z, lvbal::nominal_phase_priors(3),
                                   lvbal::Metric::circular);
    const auto report = lvbal::converge_in_place(s, g, sc.config.clustering, x, z);
    worst_time = std::max(worst_time, seconds_since(t0));
    bool all = report.converged;
    for (std::size_t i = 0; i < 9; ++i) {
      const auto k = static_cast<Eigen::Index>(s.assignment[i]);
      all = all && nearest_phase(s.xbar(static_cast<Eigen::Index>(i), k)) == hh[i].true_phase;
    }
    if (all) ++perfect;
  }
  return {perfect == 50 && worst_time < 1.0,
          fmt::format("{}/50 seeds with every agent on its true phase, slowest "
                      "convergence {:.4f} s (limit 1 s)",
                      perfect, worst_time)};
}

// 2. Static inputs on 50 random connected graphs, n <= 20.
Outcome consensus_accuracy() {
  gen::Rng rng(2024);
  std::normal_distribution<double> noise(0.0, 2.0);
  double worst = 0.0;
  std::size_t bad_graphs = 0;
  const double nominal[3] = {0.0, -120.0, 120.0};
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = std::uniform_int_distribution<std::size_t>(3, 20)(rng);
    const auto g = lvbal::build_graph(n, gen::connected_edges(rng, n, 0.2), 1.0);
    std::vector<std::size_t> truth(n);
    std::vector<double> x(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = std::uniform_int_distribution<std::size_t>(0, 2)(rng);
      x[i] = nominal[truth[i]] + noise(rng);
      z[i] = gen::uniform(rng, -5.0, 5.0);
    }
    lvbal::ClusterConfig cfg;
    cfg.dt_inner = std::min(cfg.dt_inner, 0.9 * lvbal::euler_step_bound(g, truth, 3));
    cfg.max_iter = 500000;
    const auto r = lvbal::run_until_converged(
        lvbal::init_estimator(x, z, lvbal::nominal_phase_priors(3), lvbal::Metric::circular),
        g, cfg, x, z);
    if (!r.report.converged || r.state.assignment != truth) {
      ++bad_graphs;
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto k = static_cast<Eigen::Index>(truth[i]);
      for (const auto& [est, input] :
           {std::pair{r.state.xbar(ii, k), &x}, std::pair{r.state.zbar(ii, k), &z}}) {
        const double mean = ref::group_mean(*input, truth, truth[i]);
        worst = std::max(worst, std::abs(est - mean) / std::max(std::abs(mean), 1.0));
      }
    }
  }
  return {bad_graphs == 0 && worst <= 1e-4,
          fmt::format("50 graphs, {} unconverged or misassigned, worst relative error "
                      "{:.2e} (limit 1e-4)",
                      bad_graphs, worst)};
}

// 3. Closed-form solver against the brute-force r-grid.
Outcome optimizer_equivalence() {
  gen::Rng rng(3);
  double worst_gap = 0.0;
  double worst_residual = 0.0;
  bool signs_ok = true;
  const auto t0 = Clock::now();
  for (int trial = 0; trial < 1000; ++trial) {
    const auto p = gen::triple(rng, -10.0, 10.0);
    const auto d = lvbal::solve_mixed_sign({p});
    const auto want = ref::brute_force_balance(p, 1e-3, 1.0);
    worst_gap = std::max(worst_gap, std::abs(d.objective - want.objective));
    const double r = p[0] + d.p_b[0];
    for (int k = 0; k < 3; ++k) {
      worst_residual = std::max(worst_residual, std::abs(p[k] + d.p_b[k] - r));
      for (int l = k + 1; l < 3; ++l) signs_ok = signs_ok && d.p_b[k] * d.p_b[l] >= 0.0;
    }
  }
  const double elapsed = seconds_since(t0);
  return {worst_gap <= 1e-6 && worst_residual < 1e-9 && signs_ok && elapsed < 5.0,
          fmt::format("1000 triples, objective gap {:.2e} (limit 1e-6), equality residual "
                      "{:.2e} (limit 1e-9), sign constraints {}, {:.2f} s (limit 5 s)",
                      worst_gap, worst_residual, signs_ok ? "held" : "VIOLATED", elapsed)};
}

// 4. Engine step with unconstrained batteries on random load/PV.
Outcome balancing_efficacy() {
  gen::Rng rng(4);
  double worst_in = 0.0;
  double worst_cuf = 0.0;
  std::size_t undefined = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::array<double, 9> load{}, pv{};
    for (int i = 0; i < 9; ++i) {
      load[i] = gen::uniform(rng, 0.0, 4.0);
      pv[i] = gen::uniform(rng, 0.0, 5.0);
    }
    lvbal::Engine e(gen::one_bus_config(1),
                    gen::nine_households(load, pv, 1, gen::roomy_battery()));
    const auto b = e.step().buses[0];
    worst_in = std::max(worst_in, b.in_post);
    if (std::isnan(b.cuf_post)) {
      ++undefined;
    } else {
      worst_cuf = std::max(worst_cuf, b.cuf_post);
    }
  }
  return {worst_in < 1e-6 && worst_cuf < 1e-6,
          fmt::format("200 configurations, max |I_N| post {:.2e} A (limit 1e-6), max CUF "
                      "post {:.2e} % (limit 1e-6){}",
                      worst_in, worst_cuf,
                      undefined ? fmt::format(", {} with zero current", undefined) : "")};
}

// 5. Same-sign rule.
Outcome same_sign_rule() {
  gen::Rng rng(5);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto p = gen::same_sign_triple(rng, 10.0);
    const double sign = p[0] > 0 ? 1.0 : -1.0;
    std::size_t arg = 0;
    for (std::size_t k = 1; k < 3; ++k) {
      if (std::abs(p[k]) < std::abs(p[arg])) arg = k;
    }
    const double want = sign * std::abs(p[arg]);
    const auto d = lvbal::decide_balancing({p});
    if (lvbal::p_ref_same_sign({p}) != want || d.p_ref != want || d.p_b[arg] != 0.0) {
      ++mismatches;
    }
  }
  return {mismatches == 0,
          fmt::format("500 triples, {} mismatches of p_ref or of the zero battery on the "
                      "minimising phase",
                      mismatches)};
}

// 6. Battery safety over random command sequences.
Outcome battery_safety() {
  gen::Rng rng(6);
  lvbal::BatteryParams p;
  p.eta_c = 1.0;
  p.eta_d = 1.0;
  double worst_excursion = 0.0;
  double worst_energy = 0.0;
  auto s = lvbal::make_battery_state(0.5, p);
  const double dt = 1.0 / 60.0;
  for (int step = 0; step < 10000; ++step) {
    // Wide commands so both hard limits are hit repeatedly.
    const double cmd = gen::uniform(rng, -400.0, 400.0);
    const auto r = lvbal::apply_power(s, cmd, dt, p);
    worst_excursion = std::max({worst_excursion, p.soc_min - r.state.soc,
                                r.state.soc - p.soc_max});
    worst_energy =
        std::max(worst_energy, std::abs(p.e_cap * (s.soc - r.state.soc) - r.p_actual * dt));
    s = r.state;
  }
  return {worst_excursion <= 1e-12 && worst_energy <= 1e-9,
          fmt::format("10000 steps, largest SoC excursion {:.2e} (limit 1e-12), energy "
                      "bookkeeping error {:.2e} kWh (limit 1e-9)",
                      std::max(worst_excursion, 0.0), worst_energy)};
}

// 7. Symmetrical components.
Outcome symmetrical_components() {
  const double one = lvbal::cuf({lvbal::Phasor{1, 0}, {}, {}});
  gen::Rng rng(7);
  double worst_round_trip = 0.0;
  double worst_balanced = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    lvbal::PhasorTriple i;
    for (auto& c : i) c = {gen::uniform(rng, -100, 100), gen::uniform(rng, -100, 100)};
    const auto back = lvbal::from_symmetrical_components(lvbal::symmetrical_components(i));
    for (int k = 0; k < 3; ++k) {
      worst_round_trip = std::max(worst_round_trip, std::abs(back[k] - i[k]));
    }
    const double mag = gen::uniform(rng, 0.1, 100);
    const double ph = gen::uniform(rng, -lvbal::kPi, lvbal::kPi);
    const lvbal::PhasorTriple bal{std::polar(mag, ph), std::polar(mag, ph - 2 * lvbal::kPi / 3),
                                  std::polar(mag, ph + 2 * lvbal::kPi / 3)};
    worst_balanced = std::max(worst_balanced, lvbal::cuf(bal));
  }
  return {std::abs(one - 141.42) <= 0.01 && worst_round_trip < 1e-9 && worst_balanced < 1e-9,
          fmt::format("CUF(1,0,0) = {:.4f} % (141.42 +/- 0.01), round trip {:.2e} (limit "
                      "1e-9), balanced CUF {:.2e} % (limit 1e-9)",
                      one, worst_round_trip, worst_balanced)};
}

std::string full_records(const lvbal::RunResult& r, double dt_s) {
  std::ostringstream out;
  lvbal::write_bus_records(out, r.records, dt_s);
  lvbal::write_household_records(out, r.records);
  out << lvbal::summary_to_json(r.summary);
  return out.str();
}

lvbal::RunResult run_template(const std::string& name, std::uint64_t seed) {
  const auto g = lvbal::cli::make_template(name, 9, seed);
  return lvbal::run(g.scenario.config, lvbal::make_households(g.scenario, g.profiles));
}

// 8. Full day, nine households, repeated.
Outcome determinism_and_scale() {
  const auto t0 = Clock::now();
  const auto first = run_template("nine-house", 7);
  const double elapsed = seconds_since(t0);
  const auto second = run_template("nine-house", 7);
  const bool same = full_records(first, 60.0) == full_records(second, 60.0);
  return {elapsed < 10.0 && same && first.summary.steps == 1440,
          fmt::format("{} steps in {:.2f} s (limit 10 s), repeated run {}",
                      first.summary.steps, elapsed, same ? "byte-identical" : "DIFFERS")};
}

// 9. Neutral-to-ground voltage for a 3 kW single-phase load.
Outcome ngv_single_phase_load() {
  const auto r = run_template("single-phase-load", 7);
  const auto& first = r.records.front().buses.front();
  double worst_post = 0.0;
  std::size_t served = 0;
  for (const auto& step : r.records) {
    for (const auto& b : step.buses) {
      if (b.deficit == 0.0) {
        ++served;
        worst_post = std::max(worst_post, b.ngv_post);
      }
    }
  }
  return {first.ngv_pre > 0.5 && served > 0 && worst_post < 0.01,
          fmt::format("pre {:.3f} V (must exceed 0.5), post at most {:.2e} V over the {} "
                      "steps with full battery service (limit 0.01)",
                      first.ngv_pre, worst_post, served)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"clustering correctness", clustering_correctness},
      {"consensus accuracy", consensus_accuracy},
      {"optimizer equivalence", optimizer_equivalence},
      {"balancing efficacy", balancing_efficacy},
      {"same-sign rule", same_sign_rule},
      {"battery safety", battery_safety},
      {"symmetrical components", symmetrical_components},
      {"determinism and scale", determinism_and_scale},
      {"neutral-to-ground voltage", ngv_single_phase_load},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o{false, ""};
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    if (!o.pass) ++failed;
    fmt::print("[{}] {}. {}: {}\n", o.pass ? "PASS" : "FAIL", index, name, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
