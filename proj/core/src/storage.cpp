#include "lvbal/storage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lvbal/errors.hpp"

namespace lvbal {
namespace {

double discharge_limit(const BatteryState& s, double dt_h,
                       const BatteryParams& p) {
  const double energy = std::max(0.0, s.soc - p.soc_min) * p.e_cap * p.eta_d;
  return std::min(p.p_max_discharge, energy / dt_h);
}

double charge_limit(const BatteryState& s, double dt_h,
                    const BatteryParams& p) {
  const double energy = std::max(0.0, p.soc_max - s.soc) * p.e_cap / p.eta_c;
  return std::min(p.p_max_charge, energy / dt_h);
}

}  // namespace

void BatteryParams::validate() const {
  auto fail = [](const char* what) {
    throw std::invalid_argument(std::string("battery: ") + what);
  };
  if (!(e_cap > 0.0)) fail("e_cap must be > 0");
  if (!(v_min < v_max)) fail("v_min must be < v_max");
  if (!(p_max_charge >= 0.0) || !(p_max_discharge >= 0.0)) {
    fail("power limits must be >= 0");
  }
  if (!(0.0 <= soc_min && soc_min < soc_max && soc_max <= 1.0)) {
    fail("need 0 <= soc_min < soc_max <= 1");
  }
  if (!(soc_min <= soc_low_part && soc_low_part <= soc_high_part &&
        soc_high_part <= soc_max)) {
    fail("participation band must lie inside [soc_min, soc_max]");
  }
  if (!(eta_c > 0.0 && eta_c <= 1.0) || !(eta_d > 0.0 && eta_d <= 1.0)) {
    fail("efficiencies must be in (0, 1]");
  }
}

double terminal_voltage(double soc, const BatteryParams& params) {
  if (!(soc >= 0.0 && soc <= 1.0)) {
    throw DomainError("battery: soc outside [0, 1]");
  }
  return params.v_min + (params.v_max - params.v_min) * soc;
}

BatteryState make_battery_state(double soc, const BatteryParams& params) {
  if (!(soc >= params.soc_min && soc <= params.soc_max)) {
    throw std::invalid_argument("battery: initial soc outside [soc_min, soc_max]");
  }
  return BatteryState{soc, terminal_voltage(soc, params)};
}

double current_reference(double p_b_kw, const BatteryState& state) {
  if (!(state.v_b > 0.0)) {
    throw DomainError("battery: terminal voltage must be > 0");
  }
  return 1000.0 * p_b_kw / state.v_b;
}

PowerResult apply_power(const BatteryState& state, double p_cmd, double dt_h,
                        const BatteryParams& params) {
  if (!(dt_h > 0.0)) throw std::invalid_argument("battery: dt must be > 0");
  PowerResult r;
  r.state = state;
  double p = std::clamp(p_cmd, -params.p_max_charge, params.p_max_discharge);
  double soc = state.soc;
  if (p > 0.0) {
    const double energy_limit =
        std::max(0.0, state.soc - params.soc_min) * params.e_cap *
        params.eta_d / dt_h;
    if (p >= energy_limit) {
      p = energy_limit;
      soc = params.soc_min;
    } else {
      soc = state.soc - p * dt_h / (params.e_cap * params.eta_d);
    }
  } else if (p < 0.0) {
    const double energy_limit = std::max(0.0, params.soc_max - state.soc) *
                                params.e_cap / (params.eta_c * dt_h);
    if (-p >= energy_limit) {
      p = -energy_limit;
      soc = params.soc_max;
    } else {
      soc = state.soc - p * dt_h * params.eta_c / params.e_cap;
    }
  }
  r.state.soc = std::clamp(soc, params.soc_min, params.soc_max);
  r.state.v_b = terminal_voltage(r.state.soc, params);
  r.p_actual = p;
  r.deficit = std::abs(p_cmd - p);
  return r;
}

Eligibility eligibility(const BatteryState& state, bool willing,
                        const BatteryParams& params, double dt_h) {
  if (!(dt_h > 0.0)) throw std::invalid_argument("battery: dt must be > 0");
  Eligibility e;
  e.eligible = willing && state.soc >= params.soc_low_part &&
               state.soc <= params.soc_high_part;
  if (!e.eligible) return e;
  e.headroom_charge = charge_limit(state, dt_h, params);
  e.headroom_discharge = discharge_limit(state, dt_h, params);
  return e;
}

}  // namespace lvbal
