#include "lvbal/balancing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lvbal {

std::string_view to_string(ExchangeScenario s) {
  switch (s) {
    case ExchangeScenario::all_inject:
      return "AllInject";
    case ExchangeScenario::all_consume:
      return "AllConsume";
    case ExchangeScenario::mixed:
      return "Mixed";
    case ExchangeScenario::idle:
      return "Idle";
  }
  return "?";
}

ExchangeScenario classify_scenario(const GridExchange& gx) {
  bool pos = false;
  bool neg = false;
  for (double p : gx.p_g) {
    pos = pos || p > 0.0;
    neg = neg || p < 0.0;
  }
  if (pos && neg) return ExchangeScenario::mixed;
  if (pos) return ExchangeScenario::all_inject;
  if (neg) return ExchangeScenario::all_consume;
  return ExchangeScenario::idle;
}

double p_ref_same_sign(const GridExchange& gx) {
  const auto scenario = classify_scenario(gx);
  if (scenario != ExchangeScenario::all_inject &&
      scenario != ExchangeScenario::all_consume) {
    throw std::invalid_argument(
        "balancing: min-magnitude rule needs a same-sign exchange, got " +
        std::string(to_string(scenario)));
  }
  double magnitude = std::abs(gx.p_g[0]);
  for (double p : gx.p_g) magnitude = std::min(magnitude, std::abs(p));
  return scenario == ExchangeScenario::all_inject ? magnitude : -magnitude;
}

PhaseVector battery_powers(const GridExchange& gx, double p_ref) {
  return {p_ref - gx.p_g[0], p_ref - gx.p_g[1], p_ref - gx.p_g[2]};
}

namespace {

BalancingDecision finish(const GridExchange& gx, double p_ref,
                         ExchangeScenario scenario) {
  BalancingDecision d;
  d.p_ref = p_ref;
  d.scenario = scenario;
  d.p_b = battery_powers(gx, p_ref);
  for (double& p : d.p_b) {
    // The phase that sets r is exactly zero; keep it that way.
    if (p == 0.0) p = 0.0;
    d.objective += std::abs(p);
  }
  return d;
}

}  // namespace

BalancingDecision solve_mixed_sign(const GridExchange& gx) {
  const auto& p = gx.p_g;
  const double hi = std::max({p[0], p[1], p[2]});
  const double lo = std::min({p[0], p[1], p[2]});
  const double sum = p[0] + p[1] + p[2];
  const double discharge_cost = 3.0 * hi - sum;
  const double charge_cost = sum - 3.0 * lo;
  const double r = charge_cost <= discharge_cost ? lo : hi;
  return finish(gx, r, classify_scenario(gx));
}

BalancingDecision decide_balancing(const GridExchange& gx) {
  const auto scenario = classify_scenario(gx);
  switch (scenario) {
    case ExchangeScenario::idle:
      return BalancingDecision{0.0, {0.0, 0.0, 0.0}, scenario, 0.0};
    case ExchangeScenario::all_inject:
    case ExchangeScenario::all_consume:
      return finish(gx, p_ref_same_sign(gx), scenario);
    case ExchangeScenario::mixed:
      break;
  }
  return solve_mixed_sign(gx);
}

Allocation allocate_cluster_power(double p_b_phase,
                                  std::span<const AllocationMember> members) {
  Allocation out;
  out.power.assign(members.size(), 0.0);
  double total = 0.0;
  for (const auto& m : members) {
    if (m.headroom < 0.0 || !std::isfinite(m.headroom)) {
      throw std::invalid_argument("balancing: headroom must be finite and >= 0");
    }
    if (m.eligible) total += m.headroom;
  }
  const double request = std::abs(p_b_phase);
  const double sign = p_b_phase < 0.0 ? -1.0 : 1.0;
  if (request == 0.0) return out;

  if (total <= request) {
    double served = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (!members[i].eligible) continue;
      out.power[i] = sign * members[i].headroom;
      served += members[i].headroom;
    }
    out.shortfall = request - served;
    return out;
  }
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (!members[i].eligible) continue;
    out.power[i] = sign * request * (members[i].headroom / total);
  }
  return out;
}

}  // namespace lvbal
