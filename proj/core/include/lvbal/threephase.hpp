#ifndef LVBAL_THREEPHASE_HPP_
#define LVBAL_THREEPHASE_HPP_

#include <array>
#include <complex>
#include <optional>

namespace lvbal {

using Phasor = std::complex<double>;
using PhasorTriple = std::array<Phasor, 3>;
/// One value per phase, ordered a, b, c.
using PhaseVector = std::array<double, 3>;

enum class Phase { a = 0, b = 1, c = 2 };

constexpr double kPi = 3.14159265358979323846;

/// Nominal angle of each phase in degrees: 0, -120, +120.
[[nodiscard]] double nominal_angle_deg(Phase p);
[[nodiscard]] char phase_letter(Phase p);

/// Per-phase load and PV powers, kW / kVAr.
struct PhasePowers {
  PhaseVector p_load{};
  PhaseVector q_load{};
  PhaseVector p_pv{};
  PhaseVector q_pv{};
};

struct SequenceComponents {
  Phasor positive;
  Phasor negative;
  Phasor zero;
};

struct UnbalanceMetrics {
  Phasor i_neutral;
  PhasorTriple i_phase;
  /// Empty when the positive-sequence current vanishes.
  std::optional<double> cuf_percent;
  Phasor ngv;
};

/// RMS phasors vm at 0, -120 and +120 degrees. Throws DomainError if vm <= 0.
[[nodiscard]] PhasorTriple phase_voltages(double vm);

/// Net current drawn by each phase:
///   I = [conj(S_load) - conj(S_pv)] / [conj(V) - conj(V_n)]
/// with powers converted from kW to W. Throws DomainError when a phase
/// voltage coincides with the neutral voltage.
[[nodiscard]] PhasorTriple net_phase_currents(const PhasePowers& pp,
                                              const PhasorTriple& v,
                                              Phasor vn);

/// I_N = -(I_a + I_b + I_c).
[[nodiscard]] Phasor neutral_current(const PhasorTriple& i_net);

[[nodiscard]] SequenceComponents symmetrical_components(
    const PhasorTriple& i_abc);
[[nodiscard]] PhasorTriple from_symmetrical_components(
    const SequenceComponents& seq);

/// sqrt(|I_ns|^2 + |I_zs|^2) / |I_ps| * 100. Throws DomainError when
/// |I_ps| < 1e-12.
[[nodiscard]] double cuf(const PhasorTriple& i_abc);

/// Neutral-to-ground voltage through a lumped neutral impedance.
[[nodiscard]] Phasor ngv_proxy(Phasor i_neutral, Phasor z_neutral);

/// Everything above for one bus at nominal balanced voltages with V_n = 0.
[[nodiscard]] UnbalanceMetrics unbalance_metrics(const PhasePowers& pp,
                                                 double vm, Phasor z_neutral);

}  // namespace lvbal

#endif  // LVBAL_THREEPHASE_HPP_
