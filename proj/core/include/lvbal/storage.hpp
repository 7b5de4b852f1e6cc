#ifndef LVBAL_STORAGE_HPP_
#define LVBAL_STORAGE_HPP_

namespace lvbal {

/// Household battery parameters. Powers in kW, energy in kWh, SoC as a
/// fraction of capacity.
struct BatteryParams {
  double e_cap = 10.0;
  double v_min = 44.0;
  double v_max = 54.0;
  double p_max_charge = 5.0;
  double p_max_discharge = 5.0;
  double soc_min = 0.1;
  double soc_max = 0.95;
  /// Participation band: outside it the battery sits out of balancing.
  double soc_low_part = 0.25;
  double soc_high_part = 0.85;
  double eta_c = 0.95;
  double eta_d = 0.95;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

struct BatteryState {
  double soc = 0.5;
  double v_b = 0.0;
};

/// Linear open-circuit model: v_min + (v_max - v_min) * soc.
/// Throws DomainError for soc outside [0, 1].
[[nodiscard]] double terminal_voltage(double soc, const BatteryParams& params);

/// Builds a state with v_b consistent with soc. Throws std::invalid_argument
/// if soc is outside [soc_min, soc_max].
[[nodiscard]] BatteryState make_battery_state(double soc,
                                              const BatteryParams& params);

/// Converter current reference in amperes, 1000 * p_b / v_b. Positive when
/// discharging. Throws DomainError if v_b <= 0.
[[nodiscard]] double current_reference(double p_b_kw, const BatteryState& state);

struct PowerResult {
  BatteryState state;
  /// Power actually delivered (+) or absorbed (-), kW.
  double p_actual = 0.0;
  /// |p_cmd - p_actual|, kW.
  double deficit = 0.0;
};

/// Applies a power command for dt_h hours. The command is clipped to the
/// power limits first, then to what keeps SoC inside [soc_min, soc_max]:
///   discharge: soc' = soc - p * dt / (e_cap * eta_d)
///   charge:    soc' = soc - p * dt * eta_c / e_cap
[[nodiscard]] PowerResult apply_power(const BatteryState& state, double p_cmd,
                                      double dt_h, const BatteryParams& params);

struct Eligibility {
  bool eligible = false;
  double headroom_charge = 0.0;
  double headroom_discharge = 0.0;
};

/// Willing households inside the participation band are eligible; their
/// headrooms are the largest powers apply_power would accept for dt_h hours.
/// Ineligible households report zero headroom.
[[nodiscard]] Eligibility eligibility(const BatteryState& state, bool willing,
                                      const BatteryParams& params, double dt_h);

}  // namespace lvbal

#endif  // LVBAL_STORAGE_HPP_
