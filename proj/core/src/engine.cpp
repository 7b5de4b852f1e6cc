#include "lvbal/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <utility>

#include <fmt/format.h>

#include "lvbal/errors.hpp"
#include "lvbal/oracles.hpp"

namespace lvbal {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::array<Phase, 3> kPhases = {Phase::a, Phase::b, Phase::c};

std::size_t phase_index(Phase p) { return static_cast<std::size_t>(p); }

// A cluster estimate belongs to the phase whose nominal angle is nearest.
Phase phase_of_centroid(double angle_deg) {
  static const std::vector<double> nominal = {0.0, -120.0, 120.0};
  return kPhases[assign_cluster(angle_deg, nominal, Metric::circular)];
}

double cuf_or_inf(const PhaseVector& p_g, double vm) {
  const auto m = exchange_metrics(p_g, vm, Phasor{});
  return m.cuf_percent.value_or(std::numeric_limits<double>::infinity());
}

PhaseVector add(const PhaseVector& a, const PhaseVector& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

void keep_max(double& acc, double v) {
  if (!std::isnan(v)) acc = std::max(acc, v);
}

struct PhaseAllocation {
  PhaseVector served{};
  std::vector<double> power;
};

PhaseAllocation allocate_phases(const PhaseVector& request,
                                std::span<const DispatchMember> members) {
  PhaseAllocation out;
  out.power.assign(members.size(), 0.0);
  for (auto ph : kPhases) {
    const auto p = phase_index(ph);
    std::vector<AllocationMember> group;
    std::vector<std::size_t> where;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (members[i].phase != ph) continue;
      const auto& e = members[i].eligibility;
      group.push_back({static_cast<int>(i), e.eligible,
                       request[p] >= 0.0 ? e.headroom_discharge
                                         : e.headroom_charge});
      where.push_back(i);
    }
    const auto a = allocate_cluster_power(request[p], group);
    double served = 0.0;
    for (std::size_t k = 0; k < where.size(); ++k) {
      out.power[where[k]] = a.power[k];
      served += a.power[k];
    }
    out.served[p] = served;
  }
  return out;
}

}  // namespace

std::string_view to_string(DispatchMode m) {
  switch (m) {
    case DispatchMode::full:
      return "full";
    case DispatchMode::partial:
      return "partial";
    case DispatchMode::scaled:
      return "scaled";
    case DispatchMode::hold:
      return "hold";
    case DispatchMode::disabled:
      return "disabled";
  }
  return "?";
}

UnbalanceMetrics exchange_metrics(const PhaseVector& p_g, double vm,
                                  Phasor z_n) {
  PhasePowers pp;
  for (std::size_t p = 0; p < 3; ++p) pp.p_load[p] = -p_g[p];
  return unbalance_metrics(pp, vm, z_n);
}

BusDispatch dispatch_bus(const PhaseVector& p_g_est,
                         std::span<const DispatchMember> members, bool enabled,
                         double vm) {
  BusDispatch out;
  out.allocation.assign(members.size(), 0.0);
  const auto decision = decide_balancing(GridExchange{p_g_est});
  if (!enabled) {
    out.decision.scenario = decision.scenario;
    out.mode = DispatchMode::disabled;
    return out;
  }
  out.decision = decision;

  auto first = allocate_phases(decision.p_b, members);
  bool short_any = false;
  for (std::size_t p = 0; p < 3; ++p) {
    short_any = short_any || first.served[p] != decision.p_b[p];
  }
  if (!short_any) {
    out.served = first.served;
    out.allocation = std::move(first.power);
    return out;
  }

  // Worst served fraction across the phases that were asked for anything.
  double theta = 1.0;
  for (std::size_t p = 0; p < 3; ++p) {
    if (decision.p_b[p] != 0.0) {
      theta = std::min(theta, std::clamp(first.served[p] / decision.p_b[p], 0.0, 1.0));
    }
  }
  const PhaseVector scaled{theta * decision.p_b[0], theta * decision.p_b[1],
                           theta * decision.p_b[2]};

  const double cuf_partial = cuf_or_inf(add(p_g_est, first.served), vm);
  // theta = 0 is the same as holding.
  const double cuf_scaled = theta > 0.0
                                ? cuf_or_inf(add(p_g_est, scaled), vm)
                                : std::numeric_limits<double>::infinity();
  const double cuf_hold = cuf_or_inf(p_g_est, vm);

  if (cuf_partial <= cuf_scaled && cuf_partial <= cuf_hold) {
    out.mode = DispatchMode::partial;
    out.served = first.served;
    out.allocation = std::move(first.power);
  } else if (cuf_scaled <= cuf_hold) {
    out.mode = DispatchMode::scaled;
    auto again = allocate_phases(scaled, members);
    out.served = again.served;
    out.allocation = std::move(again.power);
  } else {
    out.mode = DispatchMode::hold;
  }
  for (std::size_t p = 0; p < 3; ++p) {
    out.shortfall[p] = std::abs(decision.p_b[p] - out.served[p]);
  }
  return out;
}

std::vector<Household> make_households(const Scenario& scenario,
                                       const ProfileSet& profiles) {
  const auto& cfg = scenario.config;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Household> out;
  out.reserve(scenario.households.size());
  for (const auto& spec : scenario.households) {
    const double draw = noise(rng);
    Household h;
    h.id = spec.id;
    h.bus = spec.bus;
    h.true_phase = spec.phase;
    h.measured_angle_deg =
        spec.measured_angle_deg.value_or(nominal_angle_deg(spec.phase) +
                                         cfg.angle_noise_deg * draw);
    h.willing = spec.willing;
    h.battery = spec.battery;
    h.battery_state = make_battery_state(spec.initial_soc, spec.battery);
    const auto it = profiles.find(spec.id);
    if (it == profiles.end()) {
      throw DataError(fmt::format("no profile for household {}", spec.id));
    }
    h.load_kw = it->second.load_kw;
    h.pv_kw = it->second.pv_kw;
    out.push_back(std::move(h));
  }
  return out;
}

Engine::Engine(SimConfig config, std::vector<Household> households,
               RunOptions options)
    : config_(std::move(config)),
      options_(options),
      households_(std::move(households)) {
  config_.validate();
  if (households_.empty()) throw ConfigError("engine: no households");

  std::set<int> ids;
  std::map<int, std::vector<std::size_t>> by_bus;
  for (std::size_t i = 0; i < households_.size(); ++i) {
    const auto& h = households_[i];
    if (!ids.insert(h.id).second) {
      throw ConfigError(fmt::format("engine: duplicate household id {}", h.id));
    }
    if (h.load_kw.size() < config_.horizon || h.pv_kw.size() < config_.horizon) {
      throw DataError(fmt::format(
          "household {}: profile covers {} steps, horizon is {}", h.id,
          std::min(h.load_kw.size(), h.pv_kw.size()), config_.horizon));
    }
    for (std::size_t t = 0; t < config_.horizon; ++t) {
      if (h.pv_kw[t] < 0.0 || !std::isfinite(h.pv_kw[t]) ||
          !std::isfinite(h.load_kw[t])) {
        throw DataError(fmt::format(
            "household {}: invalid profile value at step {}", h.id, t));
      }
    }
    try {
      h.battery.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("household {}: {}", h.id, e.what()));
    }
    by_bus[h.bus].push_back(i);
  }
  for (auto& [bus, members] : by_bus) {
    auto graph = make_bus_graph(config_.graph, members.size());
    const double gain = config_.clustering.dt_inner * graph.alpha() *
                        static_cast<double>(graph.max_degree());
    if (gain >= 1.0) {
      throw ConfigError(fmt::format(
          "bus {}: dt_inner * alpha * max degree = {} must stay below 1", bus,
          gain));
    }
    buses_.push_back(Bus{bus, std::move(members), std::move(graph), std::nullopt});
  }
}

StepRecord Engine::step() {
  if (t_ >= config_.horizon) {
    throw DataError(fmt::format("engine: no profile data for step {}", t_));
  }
  StepRecord rec;
  rec.step = t_;
  for (auto& bus : buses_) rec.buses.push_back(step_bus(bus, rec.households));
  ++t_;
  return rec;
}

BusRecord Engine::step_bus(Bus& bus, std::vector<HouseholdRecord>& out) {
  const auto n = bus.members.size();
  const double dt_h = config_.dt_hours();
  const auto& cc = config_.clustering;

  std::vector<double> x(n), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& h = households_[bus.members[i]];
    x[i] = h.measured_angle_deg;
    z[i] = h.pv_kw[t_] - h.load_kw[t_];
  }

  BusRecord r;
  r.step = t_;
  r.bus = bus.id;
  r.members = n;

  // (2)-(3) clustering on angles, then per-cluster net exchange.
  if (!bus.estimator) {
    const auto centroids =
        config_.init == CentroidInit::priors
            ? nominal_phase_priors(cc.clusters)
            : random_centroids(cc.clusters,
                               config_.seed + 0x9E3779B97F4A7C15ULL *
                                                  static_cast<std::uint64_t>(bus.id + 1));
    bus.estimator = init_estimator(x, z, centroids, cc.metric);
  }
  auto& est = *bus.estimator;
  const auto report = converge_in_place(est, bus.graph, cc, x, z);
  r.iterations = report.iterations;
  r.converged = report.converged;
  r.residual = report.residual;
  if (!est.xbar.allFinite() || !est.zbar.allFinite() || !est.indicator.allFinite()) {
    throw std::runtime_error(fmt::format(
        "bus {} step {}: consensus diverged, reduce dt_inner", bus.id, t_));
  }

  const auto results = cluster_results(est, static_cast<double>(n));
  auto phase_totals = [&](std::size_t agent) {
    PhaseVector pg{};
    const auto& res = results[agent];
    for (std::size_t j = 0; j < res.totals.size(); ++j) {
      pg[phase_index(phase_of_centroid(res.xbar[j]))] += res.totals[j];
    }
    return pg;
  };
  r.pg_est = phase_totals(0);
  for (std::size_t i = 1; i < n; ++i) {
    const auto other = phase_totals(i);
    for (std::size_t p = 0; p < 3; ++p) {
      r.disagreement = std::max(r.disagreement, std::abs(other[p] - r.pg_est[p]));
    }
  }

  std::vector<DispatchMember> members(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& h = households_[bus.members[i]];
    const auto k = est.assignment[i];
    members[i].phase = phase_of_centroid(results[i].xbar[k]);
    members[i].eligibility = eligibility(h.battery_state, h.willing, h.battery, dt_h);
    if (members[i].phase != h.true_phase) ++r.misassigned;
    r.pg_pre[phase_index(h.true_phase)] += z[i];
  }

  // (4)-(5) decision and allocation.
  const auto dispatch = dispatch_bus(r.pg_est, members, config_.balancing, config_.vm);
  r.scenario = dispatch.decision.scenario;
  r.mode = dispatch.mode;
  r.p_ref = dispatch.decision.p_ref;
  r.pb_cmd = dispatch.decision.p_b;
  r.objective = dispatch.decision.objective;

  // (6) batteries.
  PhaseVector delivered_by_control{};
  for (std::size_t i = 0; i < n; ++i) {
    auto& h = households_[bus.members[i]];
    const double cmd = dispatch.allocation[i];
    HouseholdRecord hr;
    hr.step = t_;
    hr.id = h.id;
    hr.bus = h.bus;
    hr.cluster = est.assignment[i] + 1;
    hr.control_phase = members[i].phase;
    hr.eligible = members[i].eligibility.eligible;
    hr.command_kw = cmd;
    hr.current_ref_a = current_reference(cmd, h.battery_state);
    const auto applied = apply_power(h.battery_state, cmd, dt_h, h.battery);
    h.battery_state = applied.state;
    hr.actual_kw = applied.p_actual;
    hr.soc = applied.state.soc;
    hr.v_b = applied.state.v_b;
    r.pb_act[phase_index(h.true_phase)] += applied.p_actual;
    delivered_by_control[phase_index(members[i].phase)] += applied.p_actual;
    out.push_back(hr);
  }
  for (std::size_t p = 0; p < 3; ++p) {
    r.shortfall[p] = std::abs(r.pb_cmd[p] - delivered_by_control[p]);
    r.deficit += r.shortfall[p];
  }
  r.pg_post = add(r.pg_pre, r.pb_act);

  // (7) network metrics at nominal voltages.
  const auto pre = exchange_metrics(r.pg_pre, config_.vm, config_.z_n);
  const auto post = exchange_metrics(r.pg_post, config_.vm, config_.z_n);
  r.in_pre = std::abs(pre.i_neutral);
  r.in_post = std::abs(post.i_neutral);
  r.cuf_pre = pre.cuf_percent.value_or(kNaN);
  r.cuf_post = post.cuf_percent.value_or(kNaN);
  r.ngv_pre = std::abs(pre.ngv);
  r.ngv_post = std::abs(post.ngv);

  r.verify_solver = kNaN;
  r.verify_cluster = kNaN;
  if (options_.verify) {
    r.verify_solver = 0.0;
    if (r.scenario == ExchangeScenario::mixed && config_.balancing) {
      const auto oracle = oracle::brute_force_balancing(r.pg_est);
      r.verify_solver = std::abs(oracle.objective - r.objective);
    }
    const auto m = est.clusters();
    const auto sums = oracle::cluster_sums(z, est.assignment, m);
    const auto x_means = oracle::cluster_means(x, est.assignment, m);
    const auto z_means = oracle::cluster_means(z, est.assignment, m);
    double diff = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      diff = std::max(diff, std::abs(results[0].totals[j] - sums[j]));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = est.assignment[i];
      diff = std::max(diff, std::abs(results[i].xbar[k] - x_means[k]));
      diff = std::max(diff, std::abs(results[i].zbar[k] - z_means[k]));
    }
    r.verify_cluster = diff;
  }
  return r;
}

RunResult run(const SimConfig& config, std::vector<Household> households,
              RunOptions options) {
  Engine engine(config, std::move(households), options);
  RunResult out;
  out.records.reserve(config.horizon);
  std::vector<BusRecord> flat;
  for (std::size_t t = 0; t < config.horizon; ++t) {
    out.records.push_back(engine.step());
    const auto& b = out.records.back().buses;
    flat.insert(flat.end(), b.begin(), b.end());
  }
  out.summary = summarize(flat, config.dt_hours(), options.verify_tol);
  return out;
}

RunSummary summarize(std::span<const BusRecord> buses, double dt_h,
                     double verify_tol) {
  RunSummary s;
  if (buses.empty()) return s;
  std::set<std::size_t> steps;
  std::set<int> bus_ids;
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> per_step;  // wrong, total
  std::size_t wrong = 0;
  std::size_t total = 0;
  for (const auto& b : buses) {
    steps.insert(b.step);
    bus_ids.insert(b.bus);
    s.max_in_pre = std::max(s.max_in_pre, b.in_pre);
    s.max_in_post = std::max(s.max_in_post, b.in_post);
    s.mean_in_pre += b.in_pre;
    s.mean_in_post += b.in_post;
    keep_max(s.max_cuf_pre, b.cuf_pre);
    keep_max(s.max_cuf_post, b.cuf_post);
    s.max_ngv_pre = std::max(s.max_ngv_pre, b.ngv_pre);
    s.max_ngv_post = std::max(s.max_ngv_post, b.ngv_post);
    const auto [lo, hi] = std::minmax({b.pg_post[0], b.pg_post[1], b.pg_post[2]});
    s.max_spread_post = std::max(s.max_spread_post, hi - lo);
    for (double p : b.pb_act) s.throughput_kwh += std::abs(p) * dt_h;
    s.deficit_kwh += b.deficit * dt_h;
    wrong += b.misassigned;
    total += b.members;
    auto& ps = per_step[b.step];
    ps.first += b.misassigned;
    ps.second += b.members;
    if (!b.converged) ++s.unconverged;
    s.total_iterations += b.iterations;
    s.max_disagreement = std::max(s.max_disagreement, b.disagreement);
    keep_max(s.max_verify_solver, b.verify_solver);
    keep_max(s.max_verify_cluster, b.verify_cluster);
    if (b.verify_solver > verify_tol || b.verify_cluster > verify_tol) {
      ++s.verify_failures;
    }
  }
  s.steps = steps.size();
  s.buses = bus_ids.size();
  s.mean_in_pre /= static_cast<double>(buses.size());
  s.mean_in_post /= static_cast<double>(buses.size());
  s.clustering_accuracy =
      total == 0 ? 1.0 : 1.0 - static_cast<double>(wrong) / static_cast<double>(total);
  for (const auto& [step, ps] : per_step) {
    const double acc =
        ps.second == 0 ? 1.0
                       : 1.0 - static_cast<double>(ps.first) /
                                   static_cast<double>(ps.second);
    if (step == *steps.begin()) {
      s.first_step_accuracy = acc;
      s.households = ps.second;
    }
    s.min_step_accuracy = std::min(s.min_step_accuracy, acc);
  }
  return s;
}

}  // namespace lvbal
