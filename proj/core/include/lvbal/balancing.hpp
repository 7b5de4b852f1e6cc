#ifndef LVBAL_BALANCING_HPP_
#define LVBAL_BALANCING_HPP_

#include <span>
#include <string_view>
#include <vector>

#include "lvbal/threephase.hpp"

namespace lvbal {

/// Net grid power per phase at one bus, kW. Positive is injection into the
/// grid, negative is consumption.
struct GridExchange {
  PhaseVector p_g{};
};

enum class ExchangeScenario { all_inject, all_consume, mixed, idle };

[[nodiscard]] std::string_view to_string(ExchangeScenario s);

/// p_g + p_b == p_ref on every phase; battery power positive = discharge.
struct BalancingDecision {
  double p_ref = 0.0;
  PhaseVector p_b{};
  ExchangeScenario scenario = ExchangeScenario::idle;
  /// Sum of |p_b| over the phases, kW.
  double objective = 0.0;
};

/// All positive -> all_inject, all negative -> all_consume, all zero -> idle,
/// anything else mixed. Zeros next to a uniform sign take that sign.
[[nodiscard]] ExchangeScenario classify_scenario(const GridExchange& gx);

/// Common sign times the smallest magnitude. Throws std::invalid_argument
/// unless the exchange is all_inject or all_consume.
[[nodiscard]] double p_ref_same_sign(const GridExchange& gx);

/// Minimum total battery power that equalises the three phases without
/// charging one phase while discharging another.
///
/// The equalities force p_b = r - p_g for a common final exchange r, and the
/// sign constraints admit only r >= max(p_g) (discharge) or r <= min(p_g)
/// (charge). The objective is linear on both branches, so the optimum sits at
/// r = max(p_g) with cost 3 max - sum, or at r = min(p_g) with cost
/// sum - 3 min. On a tie the charging branch wins. Defined for any triple;
/// for same-sign input it reproduces the min-magnitude rule.
[[nodiscard]] BalancingDecision solve_mixed_sign(const GridExchange& gx);

/// p_b = p_ref - p_g, elementwise.
[[nodiscard]] PhaseVector battery_powers(const GridExchange& gx, double p_ref);

/// Dispatches on the scenario: idle -> zero, same sign -> min-magnitude rule,
/// mixed -> solve_mixed_sign.
[[nodiscard]] BalancingDecision decide_balancing(const GridExchange& gx);

struct AllocationMember {
  int household_id = 0;
  bool eligible = false;
  /// Largest power the member can deliver in the commanded direction, >= 0.
  double headroom = 0.0;
};

struct Allocation {
  /// Signed per-member power, same order as the input, sign of the request.
  std::vector<double> power;
  /// Unserved magnitude, kW, >= 0.
  double shortfall = 0.0;
};

/// Splits a per-phase battery request across eligible members in proportion
/// to their headroom; saturates every member when the total headroom is not
/// enough. Throws std::invalid_argument on negative headroom.
[[nodiscard]] Allocation allocate_cluster_power(
    double p_b_phase, std::span<const AllocationMember> members);

}  // namespace lvbal

#endif  // LVBAL_BALANCING_HPP_
